#pragma once

#include <vector>

#include <Eigen/Dense>

#include "spdcwg/spdc.hpp"

namespace spdcwg {

inline const double chsh_classical_bound = 2.0;
inline const double chsh_quantum_bound = 2.0 * std::sqrt(2.0);

/// Lateral displacements of the two parity analyzers, um.
struct BellSettings {
  double zeta_h = 0.0;
  double zeta_h2 = 0.0;  // zeta'_H
  double zeta_v = 0.0;
  double zeta_v2 = 0.0;  // zeta'_V
};

/// Displaced-parity matrix elements of one party at one displacement:
/// Pi_m = Int u_m(zeta + y, z) u_m(zeta - y, z), X = Int u_00(zeta + y, z) u_10(zeta - y, z).
struct PartyKernel {
  double pi00 = 0.0;
  double pi10 = 0.0;
  double x = 0.0;
};

/// Int a(zeta + s, z) b(zeta - s, z) ds dz on the common mode grid, linear in y off-lattice.
double displaced_overlap(const GuidedMode& a, const GuidedMode& b, double zeta);

/// Norm fraction of `mode` pushed out of its window by a lateral shift of +-zeta.
double window_loss(const GuidedMode& mode, double zeta);

/// Largest zeta in [0, zeta_max] for which every basis mode keeps 1 - tol of its norm.
double feasible_displacement(const TwoPhotonState& state, double zeta_max, double tol = 1e-6);

PartyKernel party_kernel(const GuidedMode& u00, const GuidedMode& u10, double zeta);

/// C(zeta_H, zeta_V) for spectral visibility v; throws WindowError when a shift
/// clips more than 1e-6 of a mode's norm.
double parity_correlation(const TwoPhotonState& state, cplx v, double zeta_h, double zeta_v);
/// Same, from precomputed kernels (H kernel from H modes, V kernel from V modes).
double parity_correlation(double w1, double w2, cplx v, const PartyKernel& h, const PartyKernel& vk);

struct ChshResult {
  double b = 0.0;
  double abs_b = 0.0;
  bool violates = false;  // |B| > 2
  double quantum_bound = chsh_quantum_bound;
};

/// B = C(zH, zV) + C(zH, zV') + C(zH', zV) - C(zH', zV').
ChshResult chsh(const TwoPhotonState& state, cplx v, const BellSettings& s);

/// Which pair of settings carries the minus sign in the one-parameter family.
enum class Placement {
  displaced_first,   // (zeta, zeta, 0, 0): minus on C(0, 0)
  displaced_second,  // (0, 0, zeta, zeta): minus on C(zeta, zeta)
};

const char* placement_name(Placement p);
BellSettings family_settings(Placement p, double zeta);

struct DisplacementOptimum {
  double zeta = 0.0;
  double abs_b = 0.0;
  double b = 0.0;
  Placement placement = Placement::displaced_first;
  double zeta_limit = 0.0;  // feasible upper end of the search
};

/// max over zeta in [0, zeta_max] (clipped to the window-feasible range) and over
/// both placements of |B|; coarse scan then golden-section to `tol` um.
DisplacementOptimum optimize_displacement(const TwoPhotonState& state, cplx v,
                                          double zeta_max = 3.0, double tol = 1e-3);

/// |B| (max over placements) for each visibility (rows) and displacement (cols).
Eigen::MatrixXd violation_map(const TwoPhotonState& state, const std::vector<double>& visibilities,
                              const std::vector<double>& zetas);

}  // namespace spdcwg
