#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "spdcwg/errors.hpp"
#include "spdcwg/tomography.hpp"
#include "support.hpp"

using namespace spdcwg;
using testing_support::hg_mode;

namespace {

constexpr double pi = std::numbers::pi;

const Grid2D& grid() {
  static const Grid2D g = testing_support::small_grid();
  return g;
}

DensityMatrix1D mixed(double w1, double w2) {
  return reduce_modes(hg_mode(grid(), 0, 0), hg_mode(grid(), 1, 0), w1, w2);
}

WignerMap clean_map(const DensityMatrix1D& r) {
  return wigner_from_density(r, half_lattice(r.y), nyquist_k_axis(r.y));
}

// (1/pi) sum_xi rho(y0 + xi, y0 - xi) with y0 on the lattice.
double direct_w_origin(const DensityMatrix1D& r) {
  const auto n = r.rho.rows();
  double s = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) s += r.rho(i, n - 1 - i).real();
  return s * r.y.step / pi;
}

}  // namespace

TEST(Reduce, TraceAndRank) {
  const DensityMatrix1D r = mixed(0.3, 0.7);
  EXPECT_NEAR(r.trace(), 1.0, 1e-10);
  EXPECT_LT(r.hermiticity_error(), 1e-14);
  const Eigenpairs e = diagonalize(r);
  EXPECT_NEAR(e.values[0], 0.7, 1e-8);
  EXPECT_NEAR(e.values[1], 0.3, 1e-8);
  for (std::size_t i = 2; i < e.values.size(); ++i) EXPECT_LT(std::abs(e.values[i]), 1e-8);
  const cplx ip = (e.vectors[0].adjoint() * e.vectors[1])(0) * r.y.step;
  EXPECT_LT(std::abs(ip), 1e-8);
}

TEST(Reduce, PureProjector) {
  const DensityMatrix1D r = mixed(1.0, 0.0);
  const Eigen::VectorXd m = marginal_profile(hg_mode(grid(), 0, 0), r.y);
  const Eigen::MatrixXd p = m * m.transpose();
  EXPECT_LT((r.rho.real() - p).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Reduce, VPartyUsesSwappedModes) {
  const UniformAxis w = UniformAxis::linspace(2.2e15, 2.5e15, 11);
  SpectralAmplitude psi{w, std::vector<cplx>(11, cplx(1.0 / std::sqrt(w.step * 10), 0.0)), true};
  const auto s = build_state(hg_mode(grid(), 0, 0), hg_mode(grid(), 1, 0), hg_mode(grid(), 0, 0),
                             hg_mode(grid(), 1, 0), 0.25, 0.75, psi, psi);
  const DensityMatrix1D h = reduce_to_y(s, Party::H);
  const DensityMatrix1D v = reduce_to_y(s, Party::V);
  EXPECT_LT((h.rho - mixed(0.25, 0.75).rho).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((v.rho - mixed(0.75, 0.25).rho).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Wigner, ParityValuesAtOrigin) {
  EXPECT_NEAR(clean_map(mixed(1.0, 0.0)).at(0.0, 0.0), 1.0 / pi, 1e-8);
  EXPECT_NEAR(clean_map(mixed(0.0, 1.0)).at(0.0, 0.0), -1.0 / pi, 1e-8);
  const DensityMatrix1D r = mixed(0.4933, 0.5067);
  const WignerMap w = clean_map(r);
  EXPECT_NEAR(w.at(0.0, 0.0), direct_w_origin(r), 1e-12);
  EXPECT_NEAR(w.at(0.0, 0.0), (0.4933 - 0.5067) / pi, 1e-6);
}

TEST(Wigner, NormalizationAndMarginal) {
  const DensityMatrix1D r = mixed(0.4, 0.6);
  const WignerMap w = clean_map(r);
  EXPECT_NEAR(w.integral(), 1.0, 1e-6);
  for (std::size_t i = 0; i < r.y.count; i += 4) {
    double s = 0.0;
    for (std::size_t b = 0; b < w.k.count; ++b) s += w.w(2 * i, b) * w.k.weight(b);
    EXPECT_NEAR(s, r.rho(i, i).real(), 1e-4) << i;
  }
}

TEST(Wigner, ReflectionCovariance) {
  const UniformAxis y = UniformAxis::linspace(-6.0, 6.0, 121);
  Eigen::VectorXcd f(y.count);
  for (std::size_t i = 0; i < y.count; ++i) {
    const double d = y[i] - 1.0;
    f(i) = std::exp(-0.5 * d * d) * std::polar(1.0, 0.7 * y[i]);
  }
  f /= std::sqrt(f.squaredNorm() * y.step);
  DensityMatrix1D r{y, f * f.adjoint()};
  DensityMatrix1D m{y, r.rho.reverse()};
  const UniformAxis k = nyquist_k_axis(y);
  const WignerMap a = wigner_from_density(r, half_lattice(y), k);
  const WignerMap b = wigner_from_density(m, half_lattice(y), k);
  for (std::size_t i = 0; i < a.y.count; i += 9) {
    for (std::size_t j = 1; j < k.count; j += 7) {
      // k axis covers [-K, K): index j mirrors to count - j.
      EXPECT_NEAR(b.w(a.y.count - 1 - i, k.count - j), a.w(i, j), 1e-12);
    }
  }
}

TEST(Wigner, RejectsUndersampledK) {
  const DensityMatrix1D r = mixed(0.5, 0.5);
  const UniformAxis k = UniformAxis::linspace(-20.0, 20.0, 11);
  EXPECT_THROW(wigner_from_density(r, r.y, k), SamplingError);
}

TEST(Wigner, RoundTrip) {
  const DensityMatrix1D r = mixed(0.4933, 0.5067);
  const DensityMatrix1D back = density_from_wigner(clean_map(r), r.y);
  EXPECT_LT((back.rho - r.rho).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_NEAR(back.trace(), 1.0, 1e-4);
}

TEST(Scan, InfiniteSnrIsIdentity) {
  const WignerMap w = clean_map(mixed(0.5, 0.5));
  const WignerMap s = simulate_noisy_scan(w, INFINITY, w.y, w.k, 1);
  EXPECT_EQ((s.w - w.w).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(simulate_noisy_scan(w, 0.0, w.y, w.k, 1), ContractError);
}

TEST(Scan, NoiseLevelAndSeeding) {
  const WignerMap w = clean_map(mixed(0.4933, 0.5067));
  const UniformAxis y = UniformAxis::linspace(-5.0, 5.0, 120);
  const UniformAxis k = UniformAxis::linspace(-2.5, 2.5, 250);
  const WignerMap clean = simulate_noisy_scan(w, INFINITY, y, k, 0);
  const WignerMap a = simulate_noisy_scan(w, 12.5, y, k, 42);
  const WignerMap b = simulate_noisy_scan(w, 12.5, y, k, 42);
  const WignerMap c = simulate_noisy_scan(w, 12.5, y, k, 43);
  EXPECT_EQ((a.w - b.w).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GT((a.w - c.w).cwiseAbs().maxCoeff(), 0.0);
  const Eigen::MatrixXd d = a.w - clean.w;
  const double sd = std::sqrt((d.array() - d.mean()).square().sum() / (d.size() - 1));
  EXPECT_NEAR(sd / (0.08 * clean.max_abs()), 1.0, 0.05);
  ASSERT_TRUE(a.noise.has_value());
  EXPECT_EQ(a.noise->seed, 42u);
}

TEST(Reconstruction, NoisyScanRecoversBasis) {
  const DensityMatrix1D r = mixed(0.4933, 0.5067);
  const UniformAxis y = UniformAxis::linspace(-5.0, 5.0, 120);
  const UniformAxis k = UniformAxis::linspace(-2.5, 2.5, 250);
  const WignerMap w = wigner_from_density(r, y, k);
  const UniformAxis t = UniformAxis::linspace(-8.0, 8.0, 321);
  const Eigen::VectorXd ref0 = marginal_profile(hg_mode(grid(), 0, 0), t);
  const Eigen::VectorXd ref1 = marginal_profile(hg_mode(grid(), 1, 0), t);
  std::vector<Eigen::MatrixXcd> spans;
  for (std::uint64_t seed = 11; seed < 21; ++seed) {
    const Eigenpairs e = diagonalize(density_from_wigner(simulate_noisy_scan(w, 12.5, y, k, seed), t));
    EXPECT_NEAR(e.values[0] + e.values[1], 1.0, 0.05);
    const double f0 = std::max(mode_fidelity(e.vectors[0], ref0), mode_fidelity(e.vectors[1], ref0));
    const double f1 = std::max(mode_fidelity(e.vectors[0], ref1), mode_fidelity(e.vectors[1], ref1));
    EXPECT_GT(f0, 0.95);
    EXPECT_GT(f1, 0.95);
    Eigen::MatrixXcd s(t.count, 2);
    s << e.vectors[0], e.vectors[1];
    spans.push_back(s);
  }
  for (std::size_t a = 0; a < spans.size(); ++a)
    for (std::size_t b = a + 1; b < spans.size(); ++b)
      EXPECT_LT(principal_angles(spans[a], spans[b]).back(), 5.0);
}

TEST(Diagonalize, RejectsNonHermitian) {
  DensityMatrix1D r = mixed(0.5, 0.5);
  r.rho(3, 70) += cplx(0.0, 1.0);
  EXPECT_THROW(diagonalize(r), ContractError);
  r.enforce_hermitian();
  EXPECT_NO_THROW(diagonalize(r));
}

TEST(Diagonalize, FlagsDegenerateTop) {
  EXPECT_TRUE(diagonalize(mixed(0.5, 0.5)).degenerate_top);
  EXPECT_FALSE(diagonalize(mixed(0.2, 0.8)).degenerate_top);
}

TEST(Fidelity, Basics) {
  const UniformAxis y = grid().y_axis();
  const Eigen::VectorXd a = marginal_profile(hg_mode(grid(), 0, 0), y);
  const Eigen::VectorXd b = marginal_profile(hg_mode(grid(), 1, 0), y);
  EXPECT_NEAR(mode_fidelity(a.cast<cplx>(), a), 1.0, 1e-12);
  EXPECT_NEAR(mode_fidelity(cplx(0.0, 2.0) * a.cast<cplx>(), a), 1.0, 1e-12);
  EXPECT_NEAR(mode_fidelity(a.cast<cplx>(), b), 0.0, 1e-12);
  EXPECT_NEAR(separability(hg_mode(grid(), 1, 2)), 1.0, 1e-10);
  EXPECT_GT(b(y.count - 40), 0.0);
  EXPECT_LT(b(39), 0.0);
}

TEST(Fidelity, PrincipalAngles) {
  const UniformAxis y = grid().y_axis();
  Eigen::MatrixXcd a(y.count, 1), b(y.count, 1), c(y.count, 2);
  a.col(0) = marginal_profile(hg_mode(grid(), 0, 0), y).cast<cplx>();
  b.col(0) = marginal_profile(hg_mode(grid(), 1, 0), y).cast<cplx>();
  c << a.col(0) + b.col(0), a.col(0) - b.col(0);
  EXPECT_NEAR(principal_angles(a, a)[0], 0.0, 1e-5);
  EXPECT_NEAR(principal_angles(a, b)[0], 90.0, 1e-5);
  Eigen::MatrixXcd ab(y.count, 2);
  ab << a, b;
  EXPECT_NEAR(principal_angles(ab, c).back(), 0.0, 1e-5);
}

TEST(Files, DensityAndWignerRoundTrip) {
  const auto dir = testing_support::scratch("tomo-files");
  const DensityMatrix1D r = mixed(0.3, 0.7);
  write_density(dir / "r.rho", r);
  const DensityMatrix1D r2 = read_density(dir / "r.rho");
  EXPECT_EQ(r2.y, r.y);
  EXPECT_EQ((r2.rho - r.rho).cwiseAbs().maxCoeff(), 0.0);
  const WignerMap w = simulate_noisy_scan(clean_map(r), 10.0, UniformAxis::linspace(-4, 4, 30),
                                          UniformAxis::linspace(-2, 2, 40), 9);
  write_wigner(dir / "w.wig", w);
  const WignerMap w2 = read_wigner(dir / "w.wig");
  EXPECT_EQ(w2.y, w.y);
  EXPECT_EQ(w2.k, w.k);
  EXPECT_EQ((w2.w - w.w).cwiseAbs().maxCoeff(), 0.0);
  ASSERT_TRUE(w2.noise.has_value());
  EXPECT_EQ(w2.noise->seed, 9u);
  EXPECT_EQ(w2.noise->sigma, w.noise->sigma);
}
