#include "spdcwg/bell.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "spdcwg/errors.hpp"

namespace spdcwg {

namespace {

constexpr double window_tol = 1e-6;

// Row of `f` at fractional row index `pos`, linear between rows; false outside.
bool interpolated_row(const Eigen::MatrixXd& f, double pos, Eigen::VectorXd& out) {
  const auto ny = static_cast<long>(f.rows());
  if (pos < -1e-9 || pos > static_cast<double>(ny - 1) + 1e-9) return false;
  const double p = std::clamp(pos, 0.0, static_cast<double>(ny - 1));
  auto i = static_cast<long>(std::floor(p));
  if (i >= ny - 1) i = ny - 2;
  const double t = p - static_cast<double>(i);
  if (t < 1e-12) {
    out = f.row(i).transpose();
  } else if (t > 1.0 - 1e-12) {
    out = f.row(i + 1).transpose();
  } else {
    out = (1.0 - t) * f.row(i).transpose() + t * f.row(i + 1).transpose();
  }
  return true;
}

void require_same_grid(const GuidedMode& a, const GuidedMode& b) {
  if (!(a.grid == b.grid)) throw GridError("displaced overlap needs modes on one grid");
}

void require_window(const TwoPhotonState& state, double zeta) {
  for (const GuidedMode* m : {&state.h00, &state.h10, &state.v00, &state.v10}) {
    const double loss = window_loss(*m, zeta);
    if (loss > window_tol) {
      throw WindowError(fmt::format("shift {:.4g} um clips {:.3g} of mode {}_{} norm", zeta, loss,
                                    m->label.str(), axis_name(m->axis)));
    }
  }
}

double family_b(double w1, double w2, cplx v, Placement p, const PartyKernel& h0,
                const PartyKernel& v0, const PartyKernel& hz, const PartyKernel& vz) {
  const double c00 = parity_correlation(w1, w2, v, h0, v0);
  const double c0z = parity_correlation(w1, w2, v, h0, vz);
  const double cz0 = parity_correlation(w1, w2, v, hz, v0);
  const double czz = parity_correlation(w1, w2, v, hz, vz);
  return p == Placement::displaced_first ? czz + cz0 + c0z - c00 : c00 + c0z + cz0 - czz;
}

}  // namespace

double displaced_overlap(const GuidedMode& a, const GuidedMode& b, double zeta) {
  require_same_grid(a, b);
  const Grid2D& g = a.grid;
  const double h = g.hy();
  const auto ny = static_cast<long>(g.ny);
  const double s0 = (zeta - g.y_min) / h;  // zeta in index units
  // Sample s so that zeta +- s lands on nodes when zeta is on the lattice or half lattice.
  const double twice = 2.0 * s0;
  const double offset = std::abs(twice - std::round(twice)) < 1e-9 &&
                                static_cast<long>(std::round(twice)) % 2 != 0
                            ? 0.5
                            : 0.0;
  Eigen::VectorXd fa, fb;
  double sum = 0.0;
  for (long m = -(ny - 1); m <= ny - 1; ++m) {
    const double s = static_cast<double>(m) + offset;
    if (!interpolated_row(a.field, s0 + s, fa) || !interpolated_row(b.field, s0 - s, fb)) continue;
    sum += fa.dot(fb);
  }
  return sum * h * g.hz();
}

double window_loss(const GuidedMode& mode, double zeta) {
  const Grid2D& g = mode.grid;
  const double shift = std::abs(zeta);
  double lost = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < g.ny; ++i) {
    const double m = mode.field.row(static_cast<Eigen::Index>(i)).squaredNorm();
    total += m;
    const double y = g.y(i);
    if (y + shift > g.y_max + 1e-12 || y - shift < g.y_min - 1e-12) lost += m;
  }
  return total > 0.0 ? lost / total : 0.0;
}

double feasible_displacement(const TwoPhotonState& state, double zeta_max, double tol) {
  auto loss = [&](double z) {
    double worst = 0.0;
    for (const GuidedMode* m : {&state.h00, &state.h10, &state.v00, &state.v10}) {
      worst = std::max(worst, window_loss(*m, z));
    }
    return worst;
  };
  if (loss(zeta_max) <= tol) return zeta_max;
  if (loss(0.0) > tol) throw WindowError("modes already clipped by the window at zero shift");
  // Loss is a step function of the shift (whole rows leave the window).
  double lo = 0.0, hi = zeta_max;
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    (loss(mid) <= tol ? lo : hi) = mid;
  }
  return lo;
}

PartyKernel party_kernel(const GuidedMode& u00, const GuidedMode& u10, double zeta) {
  return {displaced_overlap(u00, u00, zeta), displaced_overlap(u10, u10, zeta),
          displaced_overlap(u00, u10, zeta)};
}

double parity_correlation(double w1, double w2, cplx v, const PartyKernel& h,
                          const PartyKernel& vk) {
  // |Psi> = sqrt(w1) psi1 |00_H 10_V> + sqrt(w2) psi2 |10_H 00_V>.
  const double direct = w1 * h.pi00 * vk.pi10 + w2 * h.pi10 * vk.pi00;
  const double cross = 2.0 * std::sqrt(w1 * w2) * (std::conj(v) * h.x * vk.x).real();
  return direct + cross;
}

double parity_correlation(const TwoPhotonState& state, cplx v, double zeta_h, double zeta_v) {
  require_window(state, zeta_h);
  require_window(state, zeta_v);
  return parity_correlation(state.w1(), state.w2(), v, party_kernel(state.h00, state.h10, zeta_h),
                            party_kernel(state.v00, state.v10, zeta_v));
}

ChshResult chsh(const TwoPhotonState& state, cplx v, const BellSettings& s) {
  for (double z : {s.zeta_h, s.zeta_h2, s.zeta_v, s.zeta_v2}) require_window(state, z);
  std::map<double, PartyKernel> hk, vk;
  auto h = [&](double z) -> const PartyKernel& {
    auto it = hk.find(z);
    if (it == hk.end()) it = hk.emplace(z, party_kernel(state.h00, state.h10, z)).first;
    return it->second;
  };
  auto vv = [&](double z) -> const PartyKernel& {
    auto it = vk.find(z);
    if (it == vk.end()) it = vk.emplace(z, party_kernel(state.v00, state.v10, z)).first;
    return it->second;
  };
  const double w1 = state.w1(), w2 = state.w2();
  ChshResult r;
  r.b = parity_correlation(w1, w2, v, h(s.zeta_h), vv(s.zeta_v)) +
        parity_correlation(w1, w2, v, h(s.zeta_h), vv(s.zeta_v2)) +
        parity_correlation(w1, w2, v, h(s.zeta_h2), vv(s.zeta_v)) -
        parity_correlation(w1, w2, v, h(s.zeta_h2), vv(s.zeta_v2));
  r.abs_b = std::abs(r.b);
  r.violates = r.abs_b > chsh_classical_bound + 1e-9;
  return r;
}

const char* placement_name(Placement p) {
  return p == Placement::displaced_first ? "displaced_first" : "displaced_second";
}

BellSettings family_settings(Placement p, double zeta) {
  if (p == Placement::displaced_first) return {zeta, 0.0, zeta, 0.0};
  return {0.0, zeta, 0.0, zeta};
}

DisplacementOptimum optimize_displacement(const TwoPhotonState& state, cplx v, double zeta_max,
                                          double tol) {
  const double limit = feasible_displacement(state, zeta_max);
  const double w1 = state.w1(), w2 = state.w2();
  const PartyKernel h0 = party_kernel(state.h00, state.h10, 0.0);
  const PartyKernel v0 = party_kernel(state.v00, state.v10, 0.0);
  auto value = [&](Placement p, double z) {
    return family_b(w1, w2, v, p, h0, v0, party_kernel(state.h00, state.h10, z),
                    party_kernel(state.v00, state.v10, z));
  };

  DisplacementOptimum best;
  best.zeta_limit = limit;
  best.abs_b = -1.0;
  constexpr std::size_t n_scan = 121;
  const double step = limit / static_cast<double>(n_scan - 1);
  for (Placement p : {Placement::displaced_first, Placement::displaced_second}) {
    std::vector<double> scan(n_scan);
    std::size_t k_best = 0;
    for (std::size_t k = 0; k < n_scan; ++k) {
      scan[k] = std::abs(value(p, step * static_cast<double>(k)));
      if (scan[k] > scan[k_best]) k_best = k;
    }
    double a = step * static_cast<double>(k_best == 0 ? 0 : k_best - 1);
    double b = step * static_cast<double>(std::min(k_best + 1, n_scan - 1));
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
    double f1 = std::abs(value(p, x1)), f2 = std::abs(value(p, x2));
    while (b - a > tol) {
      if (f1 >= f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - invphi * (b - a);
        f1 = std::abs(value(p, x1));
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + invphi * (b - a);
        f2 = std::abs(value(p, x2));
      }
    }
    double z = 0.5 * (a + b);
    double bz = value(p, z);
    if (std::abs(bz) < scan[k_best]) {
      z = step * static_cast<double>(k_best);
      bz = value(p, z);
    }
    if (std::abs(bz) > best.abs_b) {
      best.zeta = z;
      best.b = bz;
      best.abs_b = std::abs(bz);
      best.placement = p;
    }
  }
  return best;
}

Eigen::MatrixXd violation_map(const TwoPhotonState& state, const std::vector<double>& visibilities,
                              const std::vector<double>& zetas) {
  for (double z : zetas) require_window(state, z);
  const double w1 = state.w1(), w2 = state.w2();
  const PartyKernel h0 = party_kernel(state.h00, state.h10, 0.0);
  const PartyKernel v0 = party_kernel(state.v00, state.v10, 0.0);
  Eigen::MatrixXd out(visibilities.size(), zetas.size());
  for (std::size_t c = 0; c < zetas.size(); ++c) {
    const PartyKernel hz = party_kernel(state.h00, state.h10, zetas[c]);
    const PartyKernel vz = party_kernel(state.v00, state.v10, zetas[c]);
    for (std::size_t r = 0; r < visibilities.size(); ++r) {
      const cplx v{visibilities[r], 0.0};
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          std::max(std::abs(family_b(w1, w2, v, Placement::displaced_first, h0, v0, hz, vz)),
                   std::abs(family_b(w1, w2, v, Placement::displaced_second, h0, v0, hz, vz)));
    }
  }
  return out;
}

}  // namespace spdcwg
