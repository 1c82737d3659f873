#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace spdcwg {

/// Crystal axis a field is polarized along. In the waveguide frame H photons are
/// y-polarized and V photons z-polarized.
enum class Axis { y, z };

std::string_view axis_name(Axis a) noexcept;
Axis parse_axis(std::string_view s);

/// Sellmeier fit of the form n^2 = A + sum_i B_i / (lambda^2 - C_i), lambda in um.
/// `coefficients` holds {A, B_1, C_1, B_2, C_2, ...}.
struct SellmeierSet {
  Axis axis = Axis::y;
  std::vector<double> coefficients;
  double lambda_min = 0.0;  // um
  double lambda_max = 0.0;  // um
  std::string source;

  /// Refractive index at `lambda_um`; throws DomainError outside the valid range.
  double index(double lambda_um) const;
  bool in_range(double lambda_um) const noexcept {
    return lambda_um >= lambda_min && lambda_um <= lambda_max;
  }
};

// KTP principal-axis fits from K. Kato and E. Takaoka, Appl. Opt. 41, 5040 (2002).
// Published validity is 0.43-3.54 um; the default range is stretched down to
// 0.38 um so a 400 nm pump band can be evaluated.
SellmeierSet ktp_kato2002(Axis axis);

/// Substrate crystal: one Sellmeier set per transverse polarization axis.
struct Substrate {
  SellmeierSet y = ktp_kato2002(Axis::y);
  SellmeierSet z = ktp_kato2002(Axis::z);

  const SellmeierSet& set(Axis a) const noexcept { return a == Axis::y ? y : z; }
  SellmeierSet& set(Axis a) noexcept { return a == Axis::y ? y : z; }
};

/// Channel waveguide geometry: sharp lateral walls at |y| = width/2 and an
/// erfc-diffused profile below the surface z = 0. Lengths in um.
struct ProfileParams {
  double width = 6.0;
  double depth = 10.0;
  double contrast_y = 0.021;
  double contrast_z = 0.025;
  double cover_index = 1.0;

  double contrast(Axis a) const noexcept { return a == Axis::y ? contrast_y : contrast_z; }
  void validate() const;
  bool operator==(const ProfileParams&) const = default;
};

double substrate_index(const Substrate& substrate, Axis axis, double lambda_um);
double substrate_index(Axis axis, double lambda_um);

/// Index seen by `axis`-polarized light at transverse point (y, z).
double local_index(const Substrate& substrate, Axis axis, double lambda_um, double y, double z,
                   const ProfileParams& profile);
double local_index(Axis axis, double lambda_um, double y, double z, const ProfileParams& profile);

}  // namespace spdcwg
