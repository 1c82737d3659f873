#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spdcwg/dispersion.hpp"
#include "spdcwg/io.hpp"
#include "spdcwg/modesolver.hpp"

namespace spdcwg {

/// Every knob of a batch run. Loaded from an INI file; `set` applies a
/// "section.key = value" override with the same parsing rules.
struct RunConfig {
  ProfileParams profile;
  double sellmeier_min = 0.38;  // um
  double sellmeier_max = 3.54;  // um
  Grid2D grid;

  // modes
  double census_wavelength = 0.8;
  double band_min = 0.77;
  double band_max = 0.83;
  std::size_t census_max_modes = 24;
  double curve_min = 0.73;  // signal/idler dispersion-curve band, um
  double curve_max = 0.88;
  double pump_curve_min = 0.385;
  double pump_curve_max = 0.415;
  std::size_t curve_samples = 16;
  std::size_t curve_max_modes = 8;
  std::vector<ModeLabel> overlap_h = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  std::vector<ModeLabel> overlap_v = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};

  // process
  double pump_wavelength = 0.4;
  ModeLabel pump_mode{1, 0};
  std::optional<double> poling_period;  // empty = optimize
  int order = 1;
  double length_mm = 1.0;
  double poling_min = 6.0;
  double poling_max = 12.0;
  std::size_t poling_scan = 301;

  // spectrum
  double spectrum_min = 0.74;
  double spectrum_max = 0.86;
  std::size_t spectrum_points = 4096;
  std::optional<double> filter_sigma_nm;  // empty = no filter
  double overlay_sigma_nm = 2.0;          // balanced filter drawn over the spectra
  std::vector<double> sweep_sigma_nm = {0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6, 1.8, 2.0,
                                        2.2, 2.4, 2.6, 2.8, 3.0, 3.2, 3.4, 3.6, 3.8, 4.0};

  // phase-matching map
  double map_length_mm = 4.0;
  double map_min = 0.77;
  double map_max = 0.83;
  std::size_t map_points = 241;
  std::vector<ModeLabel> map_h = {{0, 0}, {1, 0}, {0, 1}, {2, 0}};
  std::vector<ModeLabel> map_v = {{0, 0}, {1, 0}, {0, 1}, {2, 0}};

  // tomography
  std::optional<std::pair<double, double>> tomo_weights = std::pair{0.4933, 0.5067};
  std::size_t scan_ny = 120;
  std::size_t scan_nk = 250;
  double scan_y_half = 5.0;  // um
  double scan_k_half = 2.5;  // rad/um
  double snr = 12.5;
  std::size_t rho_points = 360;
  double rho_half = 9.0;
  double tilt_wavelength = 0.8;

  // bell
  std::optional<double> bell_visibility;  // empty = from the state
  double zeta_max = 3.0;
  std::size_t map_v_points = 21;
  std::size_t map_zeta_points = 61;

  // run
  std::optional<std::uint64_t> seed;
  std::filesystem::path cache_dir = "spdcwg-cache";
  bool rebuild_cache = false;

  static RunConfig load(const std::filesystem::path& path);
  /// Apply one "section.key" assignment; unknown keys raise ConfigError.
  void set(const std::string& key, const std::string& value);
  void validate() const;

  Substrate substrate() const;
  /// Semantic fields only (no cache location), in a fixed order.
  Json canonical() const;
  std::string hash() const;
};

}  // namespace spdcwg
