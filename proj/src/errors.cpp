#include "spdcwg/errors.hpp"

namespace spdcwg {

std::string_view category_name(ErrorCategory c) noexcept {
  switch (c) {
    case ErrorCategory::domain: return "domain";
    case ErrorCategory::numeric: return "numeric";
    case ErrorCategory::grid: return "grid";
    case ErrorCategory::classification: return "classification";
    case ErrorCategory::cutoff: return "cutoff";
    case ErrorCategory::degenerate_state: return "degenerate_state";
    case ErrorCategory::sampling: return "sampling";
    case ErrorCategory::window: return "window";
    case ErrorCategory::contract: return "contract";
    case ErrorCategory::balance_infeasible: return "balance_infeasible";
    case ErrorCategory::no_overlap: return "no_overlap";
    case ErrorCategory::config: return "config";
    case ErrorCategory::cache: return "cache";
    case ErrorCategory::io: return "io";
  }
  return "unknown";
}

int exit_code(ErrorCategory c) noexcept {
  switch (c) {
    case ErrorCategory::config: return 2;
    case ErrorCategory::cache: return 3;
    case ErrorCategory::io: return 4;
    case ErrorCategory::numeric: return 5;
    default: return 10 + static_cast<int>(c);
  }
}

}  // namespace spdcwg
