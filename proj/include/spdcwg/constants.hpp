#pragma once

#include <numbers>

namespace spdcwg {

inline constexpr double speed_of_light_um_per_s = 2.99792458e14;

/// Angular frequency (rad/s) of vacuum wavelength `lambda_um`.
constexpr double omega_from_wavelength(double lambda_um) {
  return 2.0 * std::numbers::pi * speed_of_light_um_per_s / lambda_um;
}
constexpr double wavelength_from_omega(double omega) {
  return 2.0 * std::numbers::pi * speed_of_light_um_per_s / omega;
}

}  // namespace spdcwg
