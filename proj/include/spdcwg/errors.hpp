#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spdcwg {

// Machine-readable failure category; the CLI prints it and maps it to an exit code.
enum class ErrorCategory {
  domain,
  numeric,
  grid,
  classification,
  cutoff,
  degenerate_state,
  sampling,
  window,
  contract,
  balance_infeasible,
  no_overlap,
  config,
  cache,
  io,
};

std::string_view category_name(ErrorCategory c) noexcept;
int exit_code(ErrorCategory c) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorCategory::domain, what) {}
};

class NumericError : public Error {
 public:
  NumericError(const std::string& what, double residual)
      : Error(ErrorCategory::numeric, what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class GridError : public Error {
 public:
  explicit GridError(const std::string& what) : Error(ErrorCategory::grid, what) {}
};

class ClassificationError : public Error {
 public:
  ClassificationError(const std::string& what, std::string candidates)
      : Error(ErrorCategory::classification, what + " (candidates: " + candidates + ")"),
        candidates_(std::move(candidates)) {}
  const std::string& candidates() const noexcept { return candidates_; }

 private:
  std::string candidates_;
};

class CutoffError : public Error {
 public:
  CutoffError(const std::string& what, double last_guided_wavelength)
      : Error(ErrorCategory::cutoff, what), last_guided_(last_guided_wavelength) {}
  double last_guided_wavelength() const noexcept { return last_guided_; }

 private:
  double last_guided_;
};

class DegenerateStateError : public Error {
 public:
  explicit DegenerateStateError(const std::string& what)
      : Error(ErrorCategory::degenerate_state, what) {}
};

class SamplingError : public Error {
 public:
  explicit SamplingError(const std::string& what) : Error(ErrorCategory::sampling, what) {}
};

class WindowError : public Error {
 public:
  explicit WindowError(const std::string& what) : Error(ErrorCategory::window, what) {}
};

class ContractError : public Error {
 public:
  explicit ContractError(const std::string& what) : Error(ErrorCategory::contract, what) {}
};

class BalanceInfeasibleError : public Error {
 public:
  explicit BalanceInfeasibleError(const std::string& what)
      : Error(ErrorCategory::balance_infeasible, what) {}
};

class NoOverlapError : public Error {
 public:
  explicit NoOverlapError(const std::string& what) : Error(ErrorCategory::no_overlap, what) {}
};

class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(ErrorCategory::config, field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class CacheError : public Error {
 public:
  explicit CacheError(const std::string& what) : Error(ErrorCategory::cache, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::io, what) {}
};

}  // namespace spdcwg
