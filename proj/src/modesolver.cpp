#include "spdcwg/modesolver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <queue>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <fmt/format.h>
// arpack.hpp drags in <complex.h>, whose `I` macro collides with other headers.
#include <arpack/arpack.hpp>
#undef I

#include "spdcwg/constants.hpp"
#include "spdcwg/errors.hpp"

namespace spdcwg {

ModeLabel parse_label(const std::string& s) {
  if (s.size() != 2 || !std::isdigit(static_cast<unsigned char>(s[0])) ||
      !std::isdigit(static_cast<unsigned char>(s[1]))) {
    throw DomainError(fmt::format("mode label '{}' must be two digits, e.g. 10", s));
  }
  return {s[0] - '0', s[1] - '0'};
}

Grid2D Grid2D::refined() const {
  Grid2D g = *this;
  g.ny = 2 * (ny - 1) + 1;
  g.nz = 2 * (nz - 1) + 1;
  return g;
}

void Grid2D::validate(const ProfileParams& profile) const {
  if (ny < 4 || nz < 4) throw GridError("grid needs at least 4 samples per axis");
  if (!(y_max > y_min) || !(z_max > z_min)) throw GridError("grid window is empty");
  const double half = 0.5 * profile.width;
  if (!(y_min < -half - hy() && y_max > half + hy())) {
    throw GridError(fmt::format("y window [{}, {}] does not contain the channel |y| <= {}", y_min,
                                y_max, half));
  }
  if (!(z_max > hz())) throw GridError("z window must extend above the surface z = 0");
  if (!(z_min <= -2.0 * profile.depth)) {
    throw GridError(fmt::format("z window must reach at least two diffusion depths ({} um)",
                                -2.0 * profile.depth));
  }
}

double GuidedMode::wavenumber() const {
  return 2.0 * std::numbers::pi * n_eff / wavelength;
}

Eigen::MatrixXd index_squared(const Substrate& substrate, Axis axis, double lambda_um,
                              const Grid2D& grid, const ProfileParams& profile) {
  constexpr int kSub = 8;
  const double hy = grid.hy();
  const double hz = grid.hz();
  const double half = 0.5 * profile.width;
  Eigen::MatrixXd n2(grid.ny, grid.nz);
  for (std::size_t i = 0; i < grid.ny; ++i) {
    const double y = grid.y(i);
    const bool wall = std::abs(std::abs(y) - half) < 0.5 * hy;
    for (std::size_t j = 0; j < grid.nz; ++j) {
      const double z = grid.z(j);
      const bool surface = std::abs(z) < 0.5 * hz;
      if (!wall && !surface) {
        const double n = local_index(substrate, axis, lambda_um, y, z, profile);
        n2(i, j) = n * n;
        continue;
      }
      double acc = 0.0;
      for (int a = 0; a < kSub; ++a) {
        const double ys = y + hy * ((a + 0.5) / kSub - 0.5);
        for (int b = 0; b < kSub; ++b) {
          const double zs = z + hz * ((b + 0.5) / kSub - 0.5);
          const double n = local_index(substrate, axis, lambda_um, ys, zs, profile);
          acc += n * n;
        }
      }
      n2(i, j) = acc / (kSub * kSub);
    }
  }
  return n2;
}

void fix_sign(Eigen::MatrixXd& field) {
  const double peak = field.cwiseAbs().maxCoeff();
  if (peak == 0.0) return;
  const double cut = (1.0 - 1e-6) * peak;
  for (Eigen::Index i = 0; i < field.rows(); ++i) {
    for (Eigen::Index j = 0; j < field.cols(); ++j) {
      if (std::abs(field(i, j)) >= cut) {
        if (field(i, j) < 0.0) field = -field;
        return;
      }
    }
  }
}

namespace {

std::pair<Eigen::Index, Eigen::Index> dominant_node(const Eigen::MatrixXd& field) {
  const double peak = field.cwiseAbs().maxCoeff();
  const double cut = (1.0 - 1e-6) * peak;
  for (Eigen::Index i = 0; i < field.rows(); ++i) {
    for (Eigen::Index j = 0; j < field.cols(); ++j) {
      if (std::abs(field(i, j)) >= cut) return {i, j};
    }
  }
  return {0, 0};
}

template <class Get>
int sign_changes(Eigen::Index n, Get get, double threshold) {
  int changes = 0;
  int last = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double v = get(k);
    if (std::abs(v) <= threshold) continue;
    const int s = v > 0.0 ? 1 : -1;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  return changes;
}

// Connected same-sign regions above `threshold`, counting only those whose own
// peak reaches `significant`.
int nodal_domains(const Eigen::MatrixXd& field, double threshold, double significant) {
  const Eigen::Index ny = field.rows();
  const Eigen::Index nz = field.cols();
  std::vector<int> mark(static_cast<std::size_t>(ny * nz), 0);
  auto id = [ny](Eigen::Index i, Eigen::Index j) { return static_cast<std::size_t>(i + j * ny); };
  int domains = 0;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> stack;
  for (Eigen::Index i = 0; i < ny; ++i) {
    for (Eigen::Index j = 0; j < nz; ++j) {
      if (mark[id(i, j)] != 0 || std::abs(field(i, j)) <= threshold) continue;
      const bool positive = field(i, j) > 0.0;
      double local_peak = 0.0;
      stack.assign(1, {i, j});
      mark[id(i, j)] = 1;
      while (!stack.empty()) {
        auto [a, b] = stack.back();
        stack.pop_back();
        local_peak = std::max(local_peak, std::abs(field(a, b)));
        const std::pair<Eigen::Index, Eigen::Index> nb[4] = {
            {a - 1, b}, {a + 1, b}, {a, b - 1}, {a, b + 1}};
        for (auto [c, d] : nb) {
          if (c < 0 || d < 0 || c >= ny || d >= nz || mark[id(c, d)] != 0) continue;
          const double v = field(c, d);
          if (std::abs(v) <= threshold || (v > 0.0) != positive) continue;
          mark[id(c, d)] = 1;
          stack.emplace_back(c, d);
        }
      }
      if (local_peak >= significant) ++domains;
    }
  }
  return domains;
}

}  // namespace

ModeLabel cut_label(const Eigen::MatrixXd& field) {
  const double peak = field.cwiseAbs().maxCoeff();
  const double threshold = 1e-3 * peak;
  const auto [im, jm] = dominant_node(field);
  const int i_nodes =
      sign_changes(field.rows(), [&](Eigen::Index k) { return field(k, jm); }, threshold);
  const int j_nodes =
      sign_changes(field.cols(), [&](Eigen::Index k) { return field(im, k); }, threshold);
  return {i_nodes, j_nodes};
}

ModeLabel classify_mode(const Eigen::MatrixXd& field, const Grid2D& grid) {
  if (field.rows() != static_cast<Eigen::Index>(grid.ny) ||
      field.cols() != static_cast<Eigen::Index>(grid.nz)) {
    throw GridError("field shape does not match grid");
  }
  const double peak = field.cwiseAbs().maxCoeff();
  if (!(peak > 0.0)) throw ClassificationError("zero field", "none");
  const ModeLabel cut = cut_label(field);
  const int domains = nodal_domains(field, 1e-3 * peak, 0.05 * peak);
  if (domains != (cut.i + 1) * (cut.j + 1)) {
    throw ClassificationError(
        fmt::format("ambiguous nodal pattern: {} domains for cut counts ({},{})", domains, cut.i,
                    cut.j),
        fmt::format("{} by cuts, {} nodal domains", cut.str(), domains));
  }
  return cut;
}

std::vector<GuidedMode> solve_modes(const Substrate& substrate, Axis axis, double lambda_um,
                                    const Grid2D& grid, const ProfileParams& profile,
                                    std::size_t max_modes) {
  profile.validate();
  grid.validate(profile);
  const double n_sub = substrate_index(substrate, axis, lambda_um);
  if (max_modes == 0) return {};

  const Eigen::MatrixXd n2 = index_squared(substrate, axis, lambda_um, grid, profile);
  const double k0 = 2.0 * std::numbers::pi / lambda_um;
  const auto my = static_cast<Eigen::Index>(grid.ny - 2);
  const auto mz = static_cast<Eigen::Index>(grid.nz - 2);
  const Eigen::Index n = my * mz;
  const double cy = 1.0 / (grid.hy() * grid.hy());
  const double cz = 1.0 / (grid.hz() * grid.hz());
  const double shift = k0 * k0 * n2.block(1, 1, my, mz).maxCoeff();
  auto idx = [mz](Eigen::Index i, Eigen::Index j) { return i * mz + j; };

  // M = shift - (Laplacian + k0^2 n^2) is symmetric positive definite; the
  // guided modes are its smallest eigenvalues.
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(5 * n));
  for (Eigen::Index i = 0; i < my; ++i) {
    for (Eigen::Index j = 0; j < mz; ++j) {
      const Eigen::Index p = idx(i, j);
      trip.emplace_back(p, p, 2.0 * cy + 2.0 * cz + shift - k0 * k0 * n2(i + 1, j + 1));
      if (i > 0) trip.emplace_back(p, idx(i - 1, j), -cy);
      if (i + 1 < my) trip.emplace_back(p, idx(i + 1, j), -cy);
      if (j > 0) trip.emplace_back(p, idx(i, j - 1), -cz);
      if (j + 1 < mz) trip.emplace_back(p, idx(i, j + 1), -cz);
    }
  }
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(m);
  if (ldlt.info() != Eigen::Success) throw NumericError("sparse factorization failed", 0.0);

  const auto nev = static_cast<a_int>(std::min<Eigen::Index>(max_modes + 1, n - 2));
  const auto ncv = static_cast<a_int>(std::min<Eigen::Index>(std::max(2 * nev + 1, nev + 24), n));
  const double tol = 1e-13;
  std::vector<double> resid(static_cast<std::size_t>(n));
  for (Eigen::Index p = 0; p < n; ++p) {
    resid[static_cast<std::size_t>(p)] = 1.0 + 0.25 * std::sin(0.7 * static_cast<double>(p));
  }
  std::vector<double> v(static_cast<std::size_t>(n) * ncv);
  std::vector<double> workd(3 * static_cast<std::size_t>(n));
  const a_int lworkl = ncv * (ncv + 8);
  std::vector<double> workl(static_cast<std::size_t>(lworkl));
  a_int iparam[11] = {0};
  a_int ipntr[11] = {0};
  iparam[0] = 1;
  iparam[2] = 5000;
  iparam[6] = 1;
  a_int ido = 0;
  a_int info = 1;
  const auto nn = static_cast<a_int>(n);
  while (true) {
    arpack::saupd(ido, arpack::bmat::identity, nn, arpack::which::largest_algebraic, nev, tol,
                  resid.data(), ncv, v.data(), nn, iparam, ipntr, workd.data(), workl.data(),
                  lworkl, info);
    if (ido != -1 && ido != 1) break;
    Eigen::Map<const Eigen::VectorXd> x(workd.data() + ipntr[0] - 1, n);
    Eigen::Map<Eigen::VectorXd> y(workd.data() + ipntr[1] - 1, n);
    y = ldlt.solve(x);
  }
  if (info < 0 || info == 1) {
    throw NumericError(fmt::format("eigensolver did not converge (info {}, {} of {} converged)",
                                   info, iparam[4], nev),
                       std::numeric_limits<double>::quiet_NaN());
  }
  std::vector<a_int> select(static_cast<std::size_t>(ncv));
  std::vector<double> theta(static_cast<std::size_t>(nev));
  std::vector<double> z(static_cast<std::size_t>(n) * nev);
  arpack::seupd(1, arpack::howmny::ritz_vectors, select.data(), theta.data(), z.data(), nn, 0.0,
                arpack::bmat::identity, nn, arpack::which::largest_algebraic, nev, tol,
                resid.data(), ncv, v.data(), nn, iparam, ipntr, workd.data(), workl.data(),
                lworkl, info);
  if (info != 0) throw NumericError(fmt::format("eigenvector extraction failed ({})", info), 0.0);

  const double hy = grid.hy();
  const double hz = grid.hz();
  std::vector<GuidedMode> modes;
  for (a_int e = 0; e < iparam[4]; ++e) {
    const double beta2 = shift - 1.0 / theta[static_cast<std::size_t>(e)];
    if (!(beta2 > 0.0)) continue;
    const double n_eff = std::sqrt(beta2) / k0;
    if (!(n_eff > n_sub)) continue;
    Eigen::Map<const Eigen::VectorXd> x(z.data() + static_cast<std::size_t>(e) * n, n);
    const Eigen::VectorXd r = (shift - beta2) * x - m * x;
    const double residual = r.norm() / (beta2 * x.norm());
    if (!(residual < 1e-10)) {
      throw NumericError(fmt::format("eigenpair residual {:.3e} above 1e-10", residual), residual);
    }
    GuidedMode mode;
    mode.axis = axis;
    mode.wavelength = lambda_um;
    mode.n_eff = n_eff;
    mode.grid = grid;
    mode.field = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid.ny),
                                       static_cast<Eigen::Index>(grid.nz));
    for (Eigen::Index i = 0; i < my; ++i) {
      for (Eigen::Index j = 0; j < mz; ++j) mode.field(i + 1, j + 1) = x(idx(i, j));
    }
    mode.field /= std::sqrt(mode.field.squaredNorm() * hy * hz);
    fix_sign(mode.field);
    try {
      mode.label = classify_mode(mode.field, grid);
      mode.classified = true;
    } catch (const ClassificationError&) {
      mode.label = cut_label(mode.field);
      mode.classified = false;
    }
    modes.push_back(std::move(mode));
  }
  std::sort(modes.begin(), modes.end(),
            [](const GuidedMode& a, const GuidedMode& b) { return a.n_eff > b.n_eff; });
  if (modes.size() > max_modes) modes.resize(max_modes);
  return modes;
}

std::vector<GuidedMode> solve_modes(Axis axis, double lambda_um, const Grid2D& grid,
                                    const ProfileParams& profile, std::size_t max_modes) {
  return solve_modes(Substrate{}, axis, lambda_um, grid, profile, max_modes);
}

const GuidedMode* find_mode(const std::vector<GuidedMode>& modes, ModeLabel label) {
  for (const auto& m : modes) {
    if (m.classified && m.label == label) return &m;
  }
  return nullptr;
}

const GuidedMode& require_mode(const std::vector<GuidedMode>& modes, ModeLabel label) {
  if (const auto* m = find_mode(modes, label)) return *m;
  throw CutoffError(fmt::format("mode {} not guided", label.str()),
                    std::numeric_limits<double>::quiet_NaN());
}

GuidedMode resample(const GuidedMode& mode, const Grid2D& target) {
  if (mode.grid == target) return mode;
  GuidedMode out = mode;
  out.grid = target;
  out.field.resize(static_cast<Eigen::Index>(target.ny), static_cast<Eigen::Index>(target.nz));
  const Grid2D& src = mode.grid;
  for (std::size_t i = 0; i < target.ny; ++i) {
    const double s = (target.y(i) - src.y_min) / src.hy();
    for (std::size_t j = 0; j < target.nz; ++j) {
      const double t = (target.z(j) - src.z_min) / src.hz();
      double value = 0.0;
      if (s >= 0.0 && t >= 0.0 && s <= static_cast<double>(src.ny - 1) &&
          t <= static_cast<double>(src.nz - 1)) {
        const auto a = std::min(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(src.ny - 2));
        const auto b = std::min(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(src.nz - 2));
        const double fa = s - static_cast<double>(a);
        const double fb = t - static_cast<double>(b);
        value = (1 - fa) * (1 - fb) * mode.field(a, b) + fa * (1 - fb) * mode.field(a + 1, b) +
                (1 - fa) * fb * mode.field(a, b + 1) + fa * fb * mode.field(a + 1, b + 1);
      }
      out.field(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = value;
    }
  }
  return out;
}

struct DispersionCurve::Spline {
  boost::math::interpolators::cardinal_cubic_b_spline<double> impl;
};

DispersionCurve::DispersionCurve(Axis axis, ModeLabel label, double omega_first,
                                 double omega_step, std::vector<double> k)
    : axis_(axis), label_(label), omega_first_(omega_first), omega_step_(omega_step),
      k_(std::move(k)) {
  if (k_.size() < 4 || !(omega_step_ > 0.0)) {
    throw ContractError("dispersion curve needs >= 4 samples on an increasing omega grid");
  }
  for (std::size_t i = 1; i < k_.size(); ++i) {
    if (!(k_[i] > k_[i - 1])) throw ContractError("k(omega) must be strictly increasing");
  }
  spline_ = std::make_shared<const Spline>(
      Spline{boost::math::interpolators::cardinal_cubic_b_spline<double>(k_.begin(), k_.end(), omega_first_, omega_step_)});
}

double DispersionCurve::omega_max() const {
  return omega_first_ + omega_step_ * static_cast<double>(k_.size() - 1);
}

std::vector<double> DispersionCurve::omegas() const {
  std::vector<double> w(k_.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = omega_first_ + omega_step_ * i;
  return w;
}

bool DispersionCurve::contains(double omega) const {
  const double slack = 1e-9 * omega_step_;
  return omega >= omega_first_ - slack && omega <= omega_max() + slack;
}

double DispersionCurve::operator()(double omega) const {
  if (!spline_) throw ContractError("empty dispersion curve");
  if (!contains(omega)) {
    throw DomainError(fmt::format("omega {:.6e} rad/s outside dispersion band [{:.6e}, {:.6e}] of {}_{}",
                                  omega, omega_first_, omega_max(), label_.str(), axis_name(axis_)));
  }
  return spline_->impl(std::clamp(omega, omega_first_, omega_max()));
}

ModeProvider direct_provider(Substrate substrate, Grid2D grid, ProfileParams profile) {
  return [substrate = std::move(substrate), grid, profile](Axis axis, double lambda_um,
                                                           std::size_t max_modes) {
    return solve_modes(substrate, axis, lambda_um, grid, profile, max_modes);
  };
}

std::vector<double> curve_wavelengths(double omega_min, double omega_max,
                                      std::size_t n_samples) {
  const double step = (omega_max - omega_min) / static_cast<double>(n_samples - 1);
  std::vector<double> lambdas(n_samples);
  for (std::size_t s = 0; s < n_samples; ++s) {
    lambdas[s] = wavelength_from_omega(omega_min + step * static_cast<double>(s));
  }
  return lambdas;
}

DispersionCurve dispersion_curve(const ModeProvider& provider, Axis axis, ModeLabel label,
                                 double omega_min, double omega_max, std::size_t n_samples,
                                 std::size_t max_modes) {
  if (n_samples < 15) throw ContractError("dispersion curve needs at least 15 samples");
  if (!(omega_max > omega_min)) throw ContractError("empty frequency band");
  const double step = (omega_max - omega_min) / static_cast<double>(n_samples - 1);
  std::vector<double> k(n_samples);
  const std::size_t centre = n_samples / 2;
  const auto lambdas = curve_wavelengths(omega_min, omega_max, n_samples);

  const double lambda_c = lambdas[centre];
  const auto centre_modes = provider(axis, lambda_c, max_modes);
  const GuidedMode* seed = find_mode(centre_modes, label);
  if (seed == nullptr) {
    throw CutoffError(fmt::format("mode {} not guided at {} um", label.str(), lambda_c),
                      std::numeric_limits<double>::quiet_NaN());
  }
  k[centre] = seed->wavenumber();

  // March outwards from the centre in both directions.
  for (int dir : {-1, +1}) {
    Eigen::MatrixXd previous = seed->field;
    double last_lambda = lambda_c;
    for (std::size_t s = centre;;) {
      if (dir < 0 && s == 0) break;
      if (dir > 0 && s + 1 == n_samples) break;
      s = dir < 0 ? s - 1 : s + 1;
      const double lambda = lambdas[s];
      const auto modes = provider(axis, lambda, max_modes);
      const GuidedMode* best = nullptr;
      double best_overlap = 0.0;
      for (const auto& m : modes) {
        if (m.field.rows() != previous.rows() || m.field.cols() != previous.cols()) {
          throw GridError("provider changed grid between wavelengths");
        }
        const double ov = std::abs((m.field.array() * previous.array()).sum()) *
                          m.grid.hy() * m.grid.hz();
        if (ov > best_overlap) {
          best_overlap = ov;
          best = &m;
        }
      }
      if (best == nullptr || best_overlap < 0.5) {
        throw CutoffError(fmt::format("mode {}_{} cut off between {} and {} um", label.str(),
                                      axis_name(axis), last_lambda, lambda),
                          last_lambda);
      }
      k[s] = best->wavenumber();
      previous = best->field;
      last_lambda = lambda;
    }
  }
  return DispersionCurve(axis, label, omega_min, step, std::move(k));
}

DispersionCurve dispersion_curve(const Substrate& substrate, Axis axis, ModeLabel label,
                                 double omega_min, double omega_max, const Grid2D& grid,
                                 const ProfileParams& profile, std::size_t n_samples) {
  return dispersion_curve(direct_provider(substrate, grid, profile), axis, label, omega_min,
                          omega_max, n_samples);
}

}  // namespace spdcwg
