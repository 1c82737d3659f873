#include "spdcwg/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "spdcwg/errors.hpp"

namespace spdcwg {

namespace {

using std::numbers::pi;

Json axis_json(const UniformAxis& a) {
  return Json{{"first", a.first}, {"step", a.step}, {"count", a.count}, {"periodic", a.periodic}};
}

UniformAxis axis_from(const Json& j) {
  return UniformAxis{j.at("first").get<double>(), j.at("step").get<double>(),
                     j.at("count").get<std::size_t>(), j.at("periodic").get<bool>()};
}

// Position of x on the axis in index units.
double index_of(const UniformAxis& a, double x) { return (x - a.first) / a.step; }

cplx rho_at(const DensityMatrix1D& r, double y1, double y2) {
  const double s1 = index_of(r.y, y1);
  const double s2 = index_of(r.y, y2);
  const double n1 = static_cast<double>(r.y.count - 1);
  if (s1 < -1e-9 || s2 < -1e-9 || s1 > n1 + 1e-9 || s2 > n1 + 1e-9) return {0.0, 0.0};
  auto split = [&](double s) {
    s = std::clamp(s, 0.0, n1);
    auto i = static_cast<Eigen::Index>(std::floor(s));
    if (i >= static_cast<Eigen::Index>(r.y.count) - 1) i = static_cast<Eigen::Index>(r.y.count) - 2;
    return std::pair{i, s - static_cast<double>(i)};
  };
  const auto [i, ti] = split(s1);
  const auto [j, tj] = split(s2);
  return (1.0 - ti) * ((1.0 - tj) * r.rho(i, j) + tj * r.rho(i, j + 1)) +
         ti * ((1.0 - tj) * r.rho(i + 1, j) + tj * r.rho(i + 1, j + 1));
}

double trapezoid_weight(std::size_t i, std::size_t n) { return (i == 0 || i + 1 == n) ? 0.5 : 1.0; }

}  // namespace

double DensityMatrix1D::trace() const { return rho.diagonal().real().sum() * y.step; }

double DensityMatrix1D::hermiticity_error() const {
  const double scale = rho.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) return 0.0;
  return (rho - rho.adjoint()).cwiseAbs().maxCoeff() / scale;
}

void DensityMatrix1D::enforce_hermitian() {
  const Eigen::MatrixXcd h = 0.5 * (rho + rho.adjoint());
  rho = h;
}

double WignerMap::integral() const {
  double total = 0.0;
  for (std::size_t i = 0; i < y.count; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < k.count; ++j) {
      row += k.weight(j) * w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    total += y.weight(i) * row;
  }
  return total;
}

double WignerMap::max_abs() const { return w.cwiseAbs().maxCoeff(); }

double WignerMap::at(double yv, double kv) const {
  const double sy = index_of(y, yv);
  const double sk = index_of(k, kv);
  const double ny = static_cast<double>(y.count - 1);
  const double nk = static_cast<double>(k.count - 1);
  if (sy < -1e-9 || sk < -1e-9 || sy > ny + 1e-9 || sk > nk + 1e-9) return 0.0;
  auto split = [](double s, double n, std::size_t count) {
    s = std::clamp(s, 0.0, n);
    auto i = static_cast<Eigen::Index>(std::floor(s));
    if (i >= static_cast<Eigen::Index>(count) - 1) i = static_cast<Eigen::Index>(count) - 2;
    return std::pair{i, s - static_cast<double>(i)};
  };
  const auto [i, ti] = split(sy, ny, y.count);
  const auto [j, tj] = split(sk, nk, k.count);
  return (1.0 - ti) * ((1.0 - tj) * w(i, j) + tj * w(i, j + 1)) +
         ti * ((1.0 - tj) * w(i + 1, j) + tj * w(i + 1, j + 1));
}

DensityMatrix1D reduce_modes(const GuidedMode& a, const GuidedMode& b, double w_a, double w_b) {
  const GuidedMode bb = b.grid == a.grid ? b : resample(b, a.grid);
  const Grid2D& g = a.grid;
  Eigen::VectorXd wz(static_cast<Eigen::Index>(g.nz));
  for (std::size_t j = 0; j < g.nz; ++j) wz(static_cast<Eigen::Index>(j)) = trapezoid_weight(j, g.nz) * g.hz();
  const Eigen::MatrixXd ra = a.field * wz.asDiagonal() * a.field.transpose();
  const Eigen::MatrixXd rb = bb.field * wz.asDiagonal() * bb.field.transpose();
  DensityMatrix1D r;
  r.y = g.y_axis();
  r.rho = (w_a * ra + w_b * rb).cast<cplx>();
  return r;
}

DensityMatrix1D reduce_to_y(const TwoPhotonState& state, Party which) {
  if (which == Party::H) return reduce_modes(state.h00, state.h10, state.w1(), state.w2());
  return reduce_modes(state.v10, state.v00, state.w1(), state.w2());
}

UniformAxis half_lattice(const UniformAxis& y) {
  return UniformAxis{y.first, 0.5 * y.step, 2 * y.count - 1, false};
}

UniformAxis nyquist_k_axis(const UniformAxis& y, std::size_t min_points) {
  std::size_t n = std::max(y.count, min_points);
  n += n % 2;  // even count puts k = 0 on a node
  return UniformAxis::full_period(pi / (2.0 * y.step), n);
}

WignerMap wigner_from_density(const DensityMatrix1D& rho, const UniformAxis& y,
                              const UniformAxis& k) {
  const double k_limit = pi / (2.0 * rho.y.step);
  const double k_max = std::max(std::abs(k.first), std::abs(k.last()));
  if (k_max > k_limit * (1.0 + 1e-12)) {
    throw SamplingError(fmt::format("|k| up to {:.6g} exceeds the rho Nyquist limit {:.6g} rad/um",
                                    k_max, k_limit));
  }
  const auto n = static_cast<long>(rho.y.count);
  const double h = rho.y.step;
  WignerMap out{y, k, Eigen::MatrixXd::Zero(y.count, k.count), std::nullopt};
  std::vector<std::pair<double, cplx>> samples;
  for (std::size_t a = 0; a < y.count; ++a) {
    samples.clear();
    const double twice = 2.0 * index_of(rho.y, y[a]);
    const double nearest = std::round(twice);
    if (std::abs(twice - nearest) < 1e-9) {
      // On the lattice (even) or half lattice (odd): every xi sample is a node.
      const auto t = static_cast<long>(nearest);
      const long lo = t % 2 == 0 ? t / 2 : (t - 1) / 2;
      const long hi = t % 2 == 0 ? lo : lo + 1;
      for (long m = 0;; ++m) {
        const long i1 = hi + m, i2 = lo - m;
        if (i1 >= n || i2 < 0) break;
        if (i1 < 0 || i2 >= n) continue;
        const double xi = 0.5 * static_cast<double>(i1 - i2) * h;
        samples.emplace_back(xi, rho.rho(i1, i2));
        if (i1 != i2) samples.emplace_back(-xi, rho.rho(i2, i1));
      }
    } else {
      const double reach = rho.y.last() - rho.y.first;
      const auto m_max = static_cast<long>(std::ceil(reach / h));
      for (long m = -m_max; m <= m_max; ++m) {
        const double xi = static_cast<double>(m) * h;
        const cplx v = rho_at(rho, y[a] + xi, y[a] - xi);
        if (v != cplx{}) samples.emplace_back(xi, v);
      }
    }
    for (std::size_t b = 0; b < k.count; ++b) {
      double sum = 0.0;
      for (const auto& [xi, v] : samples) sum += (std::polar(1.0, -2.0 * k[b] * xi) * v).real();
      out.w(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = sum * h / pi;
    }
  }
  return out;
}

WignerMap simulate_noisy_scan(const WignerMap& clean, double snr, const UniformAxis& y,
                              const UniformAxis& k, std::uint64_t seed) {
  if (!(snr > 0.0)) throw ContractError("snr must be positive");
  WignerMap out{y, k, Eigen::MatrixXd(y.count, k.count), std::nullopt};
  if (same_axis(clean.y, y) && same_axis(clean.k, k)) {
    out.w = clean.w;
  } else {
    for (std::size_t a = 0; a < y.count; ++a) {
      for (std::size_t b = 0; b < k.count; ++b) {
        out.w(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = clean.at(y[a], k[b]);
      }
    }
  }
  NoiseDescriptor noise{snr, 0.0, seed};
  if (std::isfinite(snr)) {
    noise.sigma = out.max_abs() / snr;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, noise.sigma);
    for (Eigen::Index a = 0; a < out.w.rows(); ++a) {
      for (Eigen::Index b = 0; b < out.w.cols(); ++b) out.w(a, b) += gauss(rng);
    }
  }
  out.noise = noise;
  return out;
}

DensityMatrix1D density_from_wigner(const WignerMap& w, const UniformAxis& target) {
  const double span = target.last() - target.first;
  if (!(w.k.step * span < pi)) {
    throw SamplingError(fmt::format("k step {:.4g} rad/um aliases separations up to {:.4g} um",
                                    w.k.step, span));
  }
  const std::size_t n = target.count;
  const std::size_t nk = w.k.count;
  // W on the (y + y')/2 half lattice, linear in y.
  const UniformAxis mid = half_lattice(target);
  Eigen::MatrixXd wm(mid.count, nk);
  for (std::size_t m = 0; m < mid.count; ++m) {
    const double s = index_of(w.y, mid[m]);
    const double top = static_cast<double>(w.y.count - 1);
    for (std::size_t b = 0; b < nk; ++b) {
      double v = 0.0;
      if (s >= -1e-9 && s <= top + 1e-9) {
        const double sc = std::clamp(s, 0.0, top);
        auto i = static_cast<std::size_t>(std::floor(sc));
        if (i + 1 >= w.y.count) i = w.y.count - 2;
        const double t = sc - static_cast<double>(i);
        v = (1.0 - t) * w.w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b)) +
            t * w.w(static_cast<Eigen::Index>(i + 1), static_cast<Eigen::Index>(b));
      }
      wm(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(b)) = v * w.k.weight(b);
    }
  }
  // exp(i k d dy) for every separation d in [-(n-1), n-1].
  Eigen::MatrixXcd phase(2 * n - 1, nk);
  for (std::size_t d = 0; d < 2 * n - 1; ++d) {
    const double sep = (static_cast<double>(d) - static_cast<double>(n - 1)) * target.step;
    for (std::size_t b = 0; b < nk; ++b) {
      phase(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(b)) = std::polar(1.0, w.k[b] * sep);
    }
  }
  DensityMatrix1D r{target, Eigen::MatrixXcd(n, n)};
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      const auto d = static_cast<Eigen::Index>(a + n - 1 - b);
      const auto m = static_cast<Eigen::Index>(a + b);
      r.rho(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          (phase.row(d).array() * wm.row(m).array().cast<cplx>()).sum();
    }
  }
  r.enforce_hermitian();
  return r;
}

void fix_phase(Eigen::VectorXcd& v) {
  const double peak = v.cwiseAbs().maxCoeff();
  if (!(peak > 0.0)) return;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) >= (1.0 - 1e-6) * peak) {
      v *= std::conj(v(i)) / std::abs(v(i));
      return;
    }
  }
}

Eigenpairs diagonalize(const DensityMatrix1D& rho) {
  const double herm = rho.hermiticity_error();
  if (herm > 1e-8) {
    throw ContractError(fmt::format("density matrix not Hermitian (relative error {:.3g})", herm));
  }
  const double h = rho.y.step;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.rho * h);
  if (es.info() != Eigen::Success) throw NumericError("Hermitian eigensolver failed", 0.0);
  Eigenpairs out;
  out.y = rho.y;
  const auto n = es.eigenvalues().size();
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    out.values.push_back(es.eigenvalues()(i));
    Eigen::VectorXcd v = es.eigenvectors().col(i) / std::sqrt(h);
    fix_phase(v);
    out.vectors.push_back(std::move(v));
  }
  out.noise_floor = std::max(-out.values.back(), 0.0) + 1e-12;
  out.degenerate_top = out.values.size() >= 2 && out.values[0] - out.values[1] < out.noise_floor;
  return out;
}

Eigen::VectorXd marginal_profile(const GuidedMode& mode, const UniformAxis& y) {
  const Grid2D& g = mode.grid;
  Eigen::Index im = 0, jm = 0;
  mode.field.cwiseAbs().maxCoeff(&im, &jm);
  std::vector<double> signed_root(g.ny);
  for (std::size_t i = 0; i < g.ny; ++i) {
    double m = 0.0;
    for (std::size_t j = 0; j < g.nz; ++j) {
      const double u = mode.field(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      m += trapezoid_weight(j, g.nz) * u * u;
    }
    const double cut = mode.field(static_cast<Eigen::Index>(i), jm);
    signed_root[i] = std::copysign(std::sqrt(m * g.hz()), cut);
  }
  const UniformAxis src = g.y_axis();
  Eigen::VectorXd p(y.count);
  for (std::size_t i = 0; i < y.count; ++i) {
    p(static_cast<Eigen::Index>(i)) = interp_linear<double>(src, signed_root, y[i]);
  }
  const double norm = std::sqrt(p.squaredNorm() * y.step);
  if (!(norm > 0.0)) throw GridError("reference mode has no support on the target axis");
  return p / norm;
}

double mode_fidelity(const Eigen::VectorXcd& u, const Eigen::VectorXd& reference) {
  if (u.size() != reference.size()) throw GridError("fidelity vectors on different grids");
  const double nu = u.squaredNorm();
  const double nr = reference.squaredNorm();
  if (!(nu > 0.0 && nr > 0.0)) return 0.0;
  return std::norm(u.dot(reference.cast<cplx>())) / (nu * nr);
}

double separability(const GuidedMode& mode) {
  const Eigen::MatrixXd& u = mode.field;
  Eigen::Index im = 0, jm = 0;
  u.cwiseAbs().maxCoeff(&im, &jm);
  const Eigen::VectorXd my = u.array().square().rowwise().sum().sqrt();
  const Eigen::VectorXd mz = u.array().square().colwise().sum().sqrt().transpose();
  Eigen::VectorXd a(my.size()), b(mz.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = std::copysign(my(i), u(i, jm));
  for (Eigen::Index j = 0; j < b.size(); ++j) b(j) = std::copysign(mz(j), u(im, j));
  const Eigen::MatrixXd p = a * b.transpose();
  const double overlap = (u.array() * p.array()).sum();
  return overlap * overlap / (u.squaredNorm() * p.squaredNorm());
}

std::vector<double> principal_angles(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  if (a.rows() != b.rows()) throw GridError("subspaces live on different grids");
  auto basis = [](const Eigen::MatrixXcd& m) {
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
    return Eigen::MatrixXcd(qr.householderQ() * Eigen::MatrixXcd::Identity(m.rows(), m.cols()));
  };
  const Eigen::MatrixXcd c = basis(a).adjoint() * basis(b);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(c);
  std::vector<double> angles;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    angles.push_back(std::acos(std::min(svd.singularValues()(i), 1.0)) * 180.0 / pi);
  }
  std::sort(angles.begin(), angles.end());
  return angles;
}

void write_density(const std::filesystem::path& path, const DensityMatrix1D& rho,
                   const Json& extra) {
  Json header = extra;
  header["kind"] = "density_matrix";
  header["y"] = axis_json(rho.y);
  header["shape"] = {rho.rho.rows(), rho.rho.cols()};
  header["layout"] = "row-major, interleaved real/imag";
  std::vector<double> payload;
  payload.reserve(2 * static_cast<std::size_t>(rho.rho.size()));
  for (Eigen::Index i = 0; i < rho.rho.rows(); ++i) {
    for (Eigen::Index j = 0; j < rho.rho.cols(); ++j) {
      payload.push_back(rho.rho(i, j).real());
      payload.push_back(rho.rho(i, j).imag());
    }
  }
  write_container(path, header, payload);
}

DensityMatrix1D read_density(const std::filesystem::path& path) {
  const Container c = read_container(path);
  try {
    if (c.header.at("kind") != "density_matrix") throw IoError(path.string() + ": not a density matrix");
    DensityMatrix1D r;
    r.y = axis_from(c.header.at("y"));
    const auto n = static_cast<Eigen::Index>(r.y.count);
    if (c.payload.size() != static_cast<std::size_t>(2 * n * n)) {
      throw IoError(path.string() + ": payload size mismatch");
    }
    r.rho.resize(n, n);
    std::size_t p = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j, p += 2) r.rho(i, j) = {c.payload[p], c.payload[p + 1]};
    }
    return r;
  } catch (const Json::exception& e) {
    throw IoError(fmt::format("{}: malformed header: {}", path.string(), e.what()));
  }
}

void write_wigner(const std::filesystem::path& path, const WignerMap& w, const Json& extra) {
  Json header = extra;
  header["kind"] = "wigner_map";
  header["y"] = axis_json(w.y);
  header["k"] = axis_json(w.k);
  header["shape"] = {w.w.rows(), w.w.cols()};
  header["layout"] = "row-major, y slowest";
  header["noise"] = w.noise ? Json{{"snr", std::isfinite(w.noise->snr) ? Json(w.noise->snr)
                                                                       : Json("inf")},
                                   {"sigma", w.noise->sigma},
                                   {"seed", w.noise->seed}}
                            : Json(nullptr);
  std::vector<double> payload;
  payload.reserve(static_cast<std::size_t>(w.w.size()));
  for (Eigen::Index i = 0; i < w.w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.w.cols(); ++j) payload.push_back(w.w(i, j));
  }
  write_container(path, header, payload);
}

WignerMap read_wigner(const std::filesystem::path& path) {
  const Container c = read_container(path);
  try {
    if (c.header.at("kind") != "wigner_map") throw IoError(path.string() + ": not a Wigner map");
    WignerMap w;
    w.y = axis_from(c.header.at("y"));
    w.k = axis_from(c.header.at("k"));
    const auto ny = static_cast<Eigen::Index>(w.y.count);
    const auto nk = static_cast<Eigen::Index>(w.k.count);
    if (c.payload.size() != static_cast<std::size_t>(ny * nk)) {
      throw IoError(path.string() + ": payload size mismatch");
    }
    w.w.resize(ny, nk);
    std::size_t p = 0;
    for (Eigen::Index i = 0; i < ny; ++i) {
      for (Eigen::Index j = 0; j < nk; ++j) w.w(i, j) = c.payload[p++];
    }
    const Json& n = c.header.at("noise");
    if (!n.is_null()) {
      const double snr = n.at("snr").is_string() ? std::numeric_limits<double>::infinity()
                                                 : n.at("snr").get<double>();
      w.noise = NoiseDescriptor{snr, n.at("sigma").get<double>(), n.at("seed").get<std::uint64_t>()};
    }
    return w;
  } catch (const Json::exception& e) {
    throw IoError(fmt::format("{}: malformed header: {}", path.string(), e.what()));
  }
}

}  // namespace spdcwg
