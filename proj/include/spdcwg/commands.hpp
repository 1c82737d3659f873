#pragma once

#include <filesystem>
#include <string>

#include "spdcwg/io.hpp"
#include "spdcwg/pipeline.hpp"

namespace spdcwg {

/// Batch commands. Each writes its data files under `out` and returns the
/// summary that is also written to `<out>/<command>.json`. Every file carries
/// the config hash; nothing time- or host-dependent is written.
Json cmd_solve_modes(Pipeline& p, const std::filesystem::path& out);
Json cmd_overlaps(Pipeline& p, const std::filesystem::path& out);
Json cmd_pm_map(Pipeline& p, const std::filesystem::path& out);
Json cmd_spectra(Pipeline& p, const std::filesystem::path& out);
Json cmd_visibility_sweep(Pipeline& p, const std::filesystem::path& out);
Json cmd_tomography(Pipeline& p, const std::filesystem::path& out);
Json cmd_bell(Pipeline& p, const std::filesystem::path& out);

/// Runs the named command ("solve-modes", "overlaps", ...).
Json run_command(const std::string& name, Pipeline& p, const std::filesystem::path& out);

}  // namespace spdcwg
