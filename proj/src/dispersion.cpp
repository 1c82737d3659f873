#include "spdcwg/dispersion.hpp"

#include <cmath>
#include <fmt/format.h>

#include "spdcwg/errors.hpp"

namespace spdcwg {

std::string_view axis_name(Axis a) noexcept { return a == Axis::y ? "y" : "z"; }

Axis parse_axis(std::string_view s) {
  if (s == "y" || s == "H" || s == "h") return Axis::y;
  if (s == "z" || s == "V" || s == "v") return Axis::z;
  throw DomainError(fmt::format("unknown polarization axis '{}'", s));
}

double SellmeierSet::index(double lambda_um) const {
  if (!in_range(lambda_um)) {
    throw DomainError(fmt::format("wavelength {} um outside Sellmeier range [{}, {}] um ({})",
                                  lambda_um, lambda_min, lambda_max, source));
  }
  if (coefficients.empty() || coefficients.size() % 2 == 0) {
    throw DomainError("Sellmeier coefficients must be {A, B1, C1, ...}");
  }
  const double l2 = lambda_um * lambda_um;
  double n2 = coefficients[0];
  for (std::size_t i = 1; i + 1 < coefficients.size(); i += 2) {
    n2 += coefficients[i] / (l2 - coefficients[i + 1]);
  }
  if (!(n2 > 1.0)) throw DomainError(fmt::format("Sellmeier n^2 = {} at {} um", n2, lambda_um));
  return std::sqrt(n2);
}

SellmeierSet ktp_kato2002(Axis axis) {
  SellmeierSet s;
  s.axis = axis;
  s.lambda_min = 0.38;
  s.lambda_max = 3.54;
  s.source = "Kato & Takaoka 2002, KTP n_" + std::string(axis_name(axis));
  if (axis == Axis::y) {
    s.coefficients = {3.45018, 0.04341, 0.04597, 16.98825, 39.43799};
  } else {
    s.coefficients = {4.59423, 0.06206, 0.04763, 110.80672, 86.12171};
  }
  return s;
}

void ProfileParams::validate() const {
  if (!(width > 0.0)) throw ConfigError("profile.width", "must be > 0");
  if (!(depth > 0.0)) throw ConfigError("profile.depth", "must be > 0");
  if (!(contrast_y > 0.0)) throw ConfigError("profile.contrast_y", "must be > 0");
  if (!(contrast_z > 0.0)) throw ConfigError("profile.contrast_z", "must be > 0");
  if (!(cover_index >= 1.0)) throw ConfigError("profile.cover_index", "must be >= 1");
}

double substrate_index(const Substrate& substrate, Axis axis, double lambda_um) {
  return substrate.set(axis).index(lambda_um);
}

double substrate_index(Axis axis, double lambda_um) {
  static const Substrate ktp{};
  return substrate_index(ktp, axis, lambda_um);
}

double local_index(const Substrate& substrate, Axis axis, double lambda_um, double y, double z,
                   const ProfileParams& profile) {
  const double ns = substrate_index(substrate, axis, lambda_um);
  if (z > 0.0) return profile.cover_index;
  if (std::abs(y) > 0.5 * profile.width) return ns;
  return ns + profile.contrast(axis) * std::erfc(-z / profile.depth);
}

double local_index(Axis axis, double lambda_um, double y, double z, const ProfileParams& profile) {
  static const Substrate ktp{};
  return local_index(ktp, axis, lambda_um, y, z, profile);
}

}  // namespace spdcwg
