#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "spdcwg/io.hpp"
#include "spdcwg/sampling.hpp"
#include "spdcwg/spdc.hpp"

namespace spdcwg {

enum class Party { H, V };

/// rho(y, y') on a square uniform grid, normalized so that trace * dy = 1.
struct DensityMatrix1D {
  UniformAxis y;
  Eigen::MatrixXcd rho;

  double trace() const;  // sum of diagonal times dy
  /// max |rho - rho^H| relative to max |rho|.
  double hermiticity_error() const;
  void enforce_hermitian();
};

struct NoiseDescriptor {
  double snr = 0.0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

/// W(y, k) with rows along y (um) and columns along k (rad/um).
struct WignerMap {
  UniformAxis y;
  UniformAxis k;
  Eigen::MatrixXd w;
  std::optional<NoiseDescriptor> noise;

  double integral() const;  // trapezoid in y, axis weights in k
  double max_abs() const;
  double at(double y, double k) const;  // bilinear, zero outside
};

/// rho_H (or rho_V) of the two-photon state, z integrated on the mode grid.
DensityMatrix1D reduce_to_y(const TwoPhotonState& state, Party which);
/// w_a |a><a| + w_b |b><b| after integrating out z.
DensityMatrix1D reduce_modes(const GuidedMode& a, const GuidedMode& b, double w_a, double w_b);

/// W(y,k) = (1/pi) Int d xi exp(-2 i k xi) rho(y + xi, y - xi). The xi step equals
/// the rho spacing; y on the rho lattice or half lattice hits nodes exactly,
/// other y use bilinear interpolation of rho.
WignerMap wigner_from_density(const DensityMatrix1D& rho, const UniformAxis& y,
                              const UniformAxis& k);

/// Axis of the integer and half-integer points of the rho lattice.
UniformAxis half_lattice(const UniformAxis& y);
/// Periodic k axis for which the Wigner transform of `y`-sampled rho inverts exactly.
UniformAxis nyquist_k_axis(const UniformAxis& y, std::size_t min_points = 0);

/// Resample W onto the scan grid and add i.i.d. Gaussian noise of standard
/// deviation max|W| / snr. snr = inf adds nothing.
WignerMap simulate_noisy_scan(const WignerMap& clean, double snr, const UniformAxis& y,
                              const UniformAxis& k, std::uint64_t seed);

/// rho(y,y') = Int dk exp(i k (y - y')) W((y + y')/2, k), W linear in y, then
/// Hermitian-symmetrized.
DensityMatrix1D density_from_wigner(const WignerMap& w, const UniformAxis& target);

struct Eigenpairs {
  UniformAxis y;
  std::vector<double> values;          // descending
  std::vector<Eigen::VectorXcd> vectors;  // unit norm with weight dy
  bool degenerate_top = false;        // top two closer than the noise floor
  double noise_floor = 0.0;
};

Eigenpairs diagonalize(const DensityMatrix1D& rho);

/// Phase-fix so the largest-magnitude entry is real and positive.
void fix_phase(Eigen::VectorXcd& v);

/// sqrt of the z-marginal intensity with the sign pattern of the y cut through
/// the field maximum, on `y`, unit norm.
Eigen::VectorXd marginal_profile(const GuidedMode& mode, const UniformAxis& y);

/// |<u, ref>|^2 / (|u|^2 |ref|^2) on a common axis.
double mode_fidelity(const Eigen::VectorXcd& u, const Eigen::VectorXd& reference);

/// Fidelity between a 2D mode and the product of its signed marginal profiles.
double separability(const GuidedMode& mode);

/// Principal angles (degrees, ascending) between the column spans of a and b.
std::vector<double> principal_angles(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

void write_density(const std::filesystem::path& path, const DensityMatrix1D& rho,
                   const Json& extra = Json::object());
DensityMatrix1D read_density(const std::filesystem::path& path);
void write_wigner(const std::filesystem::path& path, const WignerMap& w,
                  const Json& extra = Json::object());
WignerMap read_wigner(const std::filesystem::path& path);

}  // namespace spdcwg
