#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spdcwg/dispersion.hpp"
#include "spdcwg/sampling.hpp"

namespace spdcwg {

/// Node counts (i along y, j along z) of a transverse mode.
struct ModeLabel {
  int i = 0;
  int j = 0;

  std::string str() const { return std::to_string(i) + std::to_string(j); }
  auto operator<=>(const ModeLabel&) const = default;
};

ModeLabel parse_label(const std::string& s);

/// Uniform transverse sampling window. Fields are stored on all ny x nz nodes;
/// the outermost ring is the Dirichlet boundary and is identically zero.
struct Grid2D {
  double y_min = -9.0;
  double y_max = 9.0;
  double z_min = -25.0;
  double z_max = 5.0;
  std::size_t ny = 181;
  std::size_t nz = 601;

  double hy() const { return (y_max - y_min) / static_cast<double>(ny - 1); }
  double hz() const { return (z_max - z_min) / static_cast<double>(nz - 1); }
  double y(std::size_t i) const { return y_min + hy() * static_cast<double>(i); }
  double z(std::size_t j) const { return z_min + hz() * static_cast<double>(j); }
  UniformAxis y_axis() const { return UniformAxis::linspace(y_min, y_max, ny); }
  UniformAxis z_axis() const { return UniformAxis::linspace(z_min, z_max, nz); }

  /// Same window with both spacings halved.
  Grid2D refined() const;
  void validate(const ProfileParams& profile) const;
  bool operator==(const Grid2D&) const = default;
};

struct GuidedMode {
  ModeLabel label;
  // False for hybrid patterns; `label` then holds the cut-based reading only.
  bool classified = true;
  Axis axis = Axis::y;
  double wavelength = 0.0;  // um
  double n_eff = 0.0;
  Grid2D grid;
  Eigen::MatrixXd field;  // ny x nz, unit L2 norm over the window

  double wavenumber() const;  // 2 pi n_eff / lambda, 1/um
};

/// Index profile n^2 sampled on the grid, with cells straddling the lateral
/// walls or the surface replaced by their area average.
Eigen::MatrixXd index_squared(const Substrate& substrate, Axis axis, double lambda_um,
                              const Grid2D& grid, const ProfileParams& profile);

/// All guided modes (n_eff above the substrate index), descending n_eff,
/// normalized, sign-fixed and labeled. At most `max_modes` are returned.
std::vector<GuidedMode> solve_modes(const Substrate& substrate, Axis axis, double lambda_um,
                                    const Grid2D& grid, const ProfileParams& profile,
                                    std::size_t max_modes = 20);
std::vector<GuidedMode> solve_modes(Axis axis, double lambda_um, const Grid2D& grid,
                                    const ProfileParams& profile, std::size_t max_modes = 20);

/// Node counts read off the 1D cuts through the field maximum. Throws
/// ClassificationError when the nodal pattern is not a clean (i+1)(j+1) lattice.
ModeLabel classify_mode(const Eigen::MatrixXd& field, const Grid2D& grid);

/// Node counts along the y and z cuts through the field maximum, without the
/// nodal-domain consistency check.
ModeLabel cut_label(const Eigen::MatrixXd& field);

/// Flip `field` so its dominant lobe is positive. Ties between mirror lobes are
/// broken towards the lowest (y, z) node index.
void fix_sign(Eigen::MatrixXd& field);

const GuidedMode* find_mode(const std::vector<GuidedMode>& modes, ModeLabel label);
const GuidedMode& require_mode(const std::vector<GuidedMode>& modes, ModeLabel label);

/// Bilinear resampling onto another grid; zero outside the source window.
GuidedMode resample(const GuidedMode& mode, const Grid2D& target);

/// k(omega) of one tracked mode, cubic-interpolated between samples uniform in omega.
class DispersionCurve {
 public:
  DispersionCurve() = default;
  DispersionCurve(Axis axis, ModeLabel label, double omega_first, double omega_step,
                  std::vector<double> k);

  Axis axis() const { return axis_; }
  ModeLabel label() const { return label_; }
  double omega_min() const { return omega_first_; }
  double omega_max() const;
  const std::vector<double>& samples() const { return k_; }
  std::vector<double> omegas() const;
  bool contains(double omega) const;

  /// Wave number in 1/um; throws DomainError outside the sampled band.
  double operator()(double omega) const;

 private:
  struct Spline;
  Axis axis_ = Axis::y;
  ModeLabel label_;
  double omega_first_ = 0.0;
  double omega_step_ = 0.0;
  std::vector<double> k_;
  std::shared_ptr<const Spline> spline_;
};

/// Source of solved modes at one wavelength (plain solver or a cache in front of it).
using ModeProvider =
    std::function<std::vector<GuidedMode>(Axis axis, double lambda_um, std::size_t max_modes)>;

ModeProvider direct_provider(Substrate substrate, Grid2D grid, ProfileParams profile);

/// Wavelengths (um) at which dispersion_curve solves, in sample order.
std::vector<double> curve_wavelengths(double omega_min, double omega_max, std::size_t n_samples);

/// Samples n_eff of `label` at `n_samples` (>= 15) frequencies across the band,
/// following the mode by field overlap between neighbouring wavelengths.
DispersionCurve dispersion_curve(const Substrate& substrate, Axis axis, ModeLabel label,
                                 double omega_min, double omega_max, const Grid2D& grid,
                                 const ProfileParams& profile, std::size_t n_samples = 16);
DispersionCurve dispersion_curve(const ModeProvider& provider, Axis axis, ModeLabel label,
                                 double omega_min, double omega_max, std::size_t n_samples = 16,
                                 std::size_t max_modes = 8);

}  // namespace spdcwg
