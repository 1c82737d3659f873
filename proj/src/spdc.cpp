#include "spdcwg/spdc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "spdcwg/constants.hpp"
#include "spdcwg/errors.hpp"

namespace spdcwg {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

bool window_contains(const Grid2D& outer, const Grid2D& inner) {
  const double tol = 1e-9 * std::max({std::abs(outer.y_min), std::abs(outer.y_max),
                                      std::abs(outer.z_min), std::abs(outer.z_max), 1.0});
  return outer.y_min <= inner.y_min + tol && outer.y_max >= inner.y_max - tol &&
         outer.z_min <= inner.z_min + tol && outer.z_max >= inner.z_max - tol;
}

const Eigen::MatrixXd& on_grid(const GuidedMode& mode, const Grid2D& target,
                               Eigen::MatrixXd& storage) {
  if (mode.grid == target) return mode.field;
  if (!window_contains(mode.grid, target)) {
    throw GridError(fmt::format("mode {} window does not cover the overlap grid",
                                mode.label.str()));
  }
  storage = resample(mode, target).field;
  return storage;
}

double trapezoid_weight(std::size_t i, std::size_t n) { return (i == 0 || i + 1 == n) ? 0.5 : 1.0; }

}  // namespace

void ProcessSpec::validate() const {
  if (!(poling_period > 0.0)) throw ContractError("poling period must be positive");
  if (order < 1) throw ContractError("QPM order must be >= 1");
  if (!(length_mm > 0.0)) throw ContractError("crystal length must be positive");
  if (!(pump_wavelength > 0.0)) throw ContractError("pump wavelength must be positive");
}

double ProcessSpec::omega_pump() const { return omega_from_wavelength(pump_wavelength); }

std::string ProcessSpec::name() const {
  return fmt::format("{}P-{}H-{}V", pump.str(), h.str(), v.str());
}

double SpectralAmplitude::norm2() const {
  std::vector<double> p(values.size());
  std::transform(values.begin(), values.end(), p.begin(), [](cplx x) { return std::norm(x); });
  return trapezoid(p, omega.step);
}

void FilterSpec::validate() const {
  if (!(sigma > 0.0)) throw ContractError("filter bandwidth must be positive");
}

UniformAxis omega_grid(double lambda_min_um, double lambda_max_um, std::size_t n) {
  if (!(lambda_max_um > lambda_min_um) || lambda_min_um <= 0.0) {
    throw ContractError("wavelength band must be positive and increasing");
  }
  return UniformAxis::linspace(omega_from_wavelength(lambda_max_um),
                               omega_from_wavelength(lambda_min_um), n);
}

cplx spatial_overlap(const GuidedMode& pump, const GuidedMode& h, const GuidedMode& v) {
  const Grid2D& g = h.grid;
  Eigen::MatrixXd ps, vs;
  const Eigen::MatrixXd& up = on_grid(pump, g, ps);
  const Eigen::MatrixXd& uv = on_grid(v, g, vs);
  const Eigen::MatrixXd& uh = h.field;
  double sum = 0.0;
  for (std::size_t i = 0; i < g.ny; ++i) {
    double row = 0.0;
    const auto ii = static_cast<Eigen::Index>(i);
    for (std::size_t j = 0; j < g.nz; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      row += trapezoid_weight(j, g.nz) * up(ii, jj) * uh(ii, jj) * uv(ii, jj);
    }
    sum += trapezoid_weight(i, g.ny) * row;
  }
  // Real fields; conjugation is a no-op.
  return {sum * g.hy() * g.hz(), 0.0};
}

Eigen::MatrixXd coupling_matrix(const GuidedMode& pump, std::span<const GuidedMode> h_modes,
                                std::span<const GuidedMode> v_modes) {
  Eigen::MatrixXd m(h_modes.size(), v_modes.size());
  for (std::size_t a = 0; a < h_modes.size(); ++a) {
    for (std::size_t b = 0; b < v_modes.size(); ++b) {
      m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          std::norm(spatial_overlap(pump, h_modes[a], v_modes[b]));
    }
  }
  return m;
}

double sinc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

double phase_mismatch(const ProcessSpec& process, const ProcessCurves& curves, double omega_h,
                      double omega_v) {
  return curves.pump(omega_h + omega_v) - curves.h(omega_h) - curves.v(omega_v) -
         two_pi * process.order / process.poling_period;
}

double phase_matching(const ProcessSpec& process, const ProcessCurves& curves, double omega_h,
                      double omega_v) {
  const double half = 0.5 * process.length_um();
  return half * sinc(half * phase_mismatch(process, curves, omega_h, omega_v));
}

BandMap phase_matching_map(const ProcessSpec& process, const ProcessCurves& curves, cplx alpha,
                           const UniformAxis& lambda_h, const UniformAxis& lambda_v) {
  process.validate();
  BandMap map{process.name(), lambda_h, lambda_v,
              Eigen::MatrixXd(lambda_h.count, lambda_v.count)};
  const double a2 = std::norm(alpha);
  for (std::size_t i = 0; i < lambda_h.count; ++i) {
    const double wh = omega_from_wavelength(lambda_h[i]);
    for (std::size_t j = 0; j < lambda_v.count; ++j) {
      const double phi = phase_matching(process, curves, wh, omega_from_wavelength(lambda_v[j]));
      map.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a2 * phi * phi;
    }
  }
  return map;
}

std::vector<std::pair<double, double>> energy_line(double pump_wavelength_um,
                                                   const UniformAxis& lambda_h) {
  const double wp = omega_from_wavelength(pump_wavelength_um);
  std::vector<std::pair<double, double>> line;
  for (std::size_t i = 0; i < lambda_h.count; ++i) {
    const double wv = wp - omega_from_wavelength(lambda_h[i]);
    if (wv > 0.0) line.emplace_back(lambda_h[i], wavelength_from_omega(wv));
  }
  return line;
}

SpectralAmplitude process_spectrum(const ProcessSpec& process, const ProcessCurves& curves,
                                   const UniformAxis& omega) {
  process.validate();
  const double wp = process.omega_pump();
  SpectralAmplitude s{omega, std::vector<cplx>(omega.count), false};
  for (std::size_t i = 0; i < omega.count; ++i) {
    s.values[i] = phase_matching(process, curves, omega[i], wp - omega[i]);
  }
  return s;
}

double gaussian_filter(double omega, const FilterSpec& filter) {
  const double x = (omega - filter.center) / filter.sigma;
  return std::exp(-0.5 * x * x);
}

double production_rate(cplx alpha, const SpectralAmplitude& phi,
                       const std::optional<FilterSpec>& filter) {
  if (filter) filter->validate();
  std::vector<double> p(phi.values.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double f = filter ? gaussian_filter(phi.omega[i], *filter) : 1.0;
    p[i] = std::norm(alpha * f * phi.values[i]);
  }
  return trapezoid(p, phi.omega.step);
}

SpectralAmplitude normalized_amplitude(cplx alpha, const SpectralAmplitude& phi,
                                       const std::optional<FilterSpec>& filter, double rate) {
  if (!(rate > 0.0)) throw DegenerateStateError("zero production rate; amplitude undefined");
  const double scale = 1.0 / std::sqrt(rate);
  SpectralAmplitude psi{phi.omega, std::vector<cplx>(phi.values.size()), true};
  for (std::size_t i = 0; i < psi.values.size(); ++i) {
    const double f = filter ? gaussian_filter(phi.omega[i], *filter) : 1.0;
    psi.values[i] = alpha * f * phi.values[i] * scale;
  }
  return psi;
}

cplx spectral_visibility(const SpectralAmplitude& psi1, const SpectralAmplitude& psi2) {
  if (!same_axis(psi1.omega, psi2.omega) || psi1.values.size() != psi2.values.size()) {
    throw GridError("amplitudes sampled on different frequency grids");
  }
  std::vector<cplx> p(psi1.values.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::conj(psi1.values[i]) * psi2.values[i];
  return trapezoid(p, psi1.omega.step);
}

double spectral_overlap(const SpectralAmplitude& phi1, const SpectralAmplitude& phi2) {
  const double n = std::sqrt(phi1.norm2() * phi2.norm2());
  if (!(n > 0.0)) return 0.0;
  return std::abs(spectral_visibility(phi1, phi2)) / n;
}

BalanceResult balance_filter_center(const SpectralAmplitude& phi1, const SpectralAmplitude& phi2,
                                    cplx alpha1, cplx alpha2, double sigma,
                                    std::optional<std::pair<double, double>> window) {
  if (!same_axis(phi1.omega, phi2.omega)) throw GridError("spectra on different grids");
  const auto [lo, hi] = window.value_or(std::pair{phi1.omega.first, phi1.omega.last()});
  if (!(hi > lo)) throw ContractError("empty balancing window");

  auto rates = [&](double center) {
    const FilterSpec f{center, sigma};
    return std::pair{production_rate(alpha1, phi1, f), production_rate(alpha2, phi2, f)};
  };
  auto imbalance = [&](double center) {
    const auto [r1, r2] = rates(center);
    const double s = r1 + r2;
    return s > 0.0 ? (r1 - r2) / s : std::numeric_limits<double>::quiet_NaN();
  };

  constexpr std::size_t n_scan = 801;
  const double step = (hi - lo) / static_cast<double>(n_scan - 1);
  std::vector<double> roots;
  double a = lo;
  double fa = imbalance(a);
  if (fa == 0.0) roots.push_back(a);
  for (std::size_t s = 1; s < n_scan; ++s) {
    const double b = lo + step * static_cast<double>(s);
    const double fb = imbalance(b);
    if (fb == 0.0) {
      roots.push_back(b);
    } else if (std::isfinite(fa) && std::isfinite(fb) && fa != 0.0 && (fa < 0.0) != (fb < 0.0)) {
      double x0 = a, x1 = b, f0 = fa;
      for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (x0 + x1);
        const double fm = imbalance(m);
        if (fm == 0.0 || std::abs(fm) < 1e-9 || x1 - x0 < 1e-15 * std::abs(m)) {
          x0 = x1 = m;
          break;
        }
        if ((fm < 0.0) == (f0 < 0.0)) {
          x0 = m;
          f0 = fm;
        } else {
          x1 = m;
        }
      }
      roots.push_back(0.5 * (x0 + x1));
    }
    a = b;
    fa = fb;
  }
  if (roots.empty()) {
    throw BalanceInfeasibleError(
        fmt::format("R1 - R2 keeps one sign for filter centers in [{:.6g}, {:.6g}] rad/s at "
                    "sigma {:.6g} rad/s",
                    lo, hi, sigma));
  }

  BalanceResult best;
  double best_rate = -1.0;
  for (double c : roots) {
    const auto [r1, r2] = rates(c);
    if (std::abs(r1 - r2) / (r1 + r2) >= 1e-6) continue;
    if (r1 + r2 > best_rate) {
      best_rate = r1 + r2;
      best = {c, r1, r2, {}, roots.size()};
    }
  }
  if (best_rate < 0.0) throw BalanceInfeasibleError("bisection did not reach the balance tolerance");
  const FilterSpec f{best.center, sigma};
  best.visibility = spectral_visibility(normalized_amplitude(alpha1, phi1, f, best.rate1),
                                        normalized_amplitude(alpha2, phi2, f, best.rate2));
  return best;
}

PolingResult optimize_poling(ProcessSpec p1, ProcessSpec p2, const ProcessCurves& c1,
                             const ProcessCurves& c2, const UniformAxis& omega, double lo,
                             double hi, std::size_t n_scan, double tol) {
  if (p1.order != p2.order || p1.pump_wavelength != p2.pump_wavelength ||
      p1.length_mm != p2.length_mm) {
    throw ContractError("processes must share QPM order, pump wavelength and crystal length");
  }
  if (!(hi > lo) || lo <= 0.0 || n_scan < 3) throw ContractError("bad poling search range");
  p1.validate();
  p2.validate();

  // The period enters only through the constant grating vector, so the
  // dispersive part of the mismatch is tabulated once.
  const double wp = p1.omega_pump();
  const double half = 0.5 * p1.length_um();
  std::vector<double> base1(omega.count), base2(omega.count);
  for (std::size_t i = 0; i < omega.count; ++i) {
    base1[i] = c1.pump(wp) - c1.h(omega[i]) - c1.v(wp - omega[i]);
    base2[i] = c2.pump(wp) - c2.h(omega[i]) - c2.v(wp - omega[i]);
  }
  auto objective = [&](double period) {
    const double g = two_pi * p1.order / period;
    SpectralAmplitude s1{omega, std::vector<cplx>(omega.count), false};
    SpectralAmplitude s2 = s1;
    for (std::size_t i = 0; i < omega.count; ++i) {
      s1.values[i] = half * sinc(half * (base1[i] - g));
      s2.values[i] = half * sinc(half * (base2[i] - g));
    }
    return spectral_overlap(s1, s2);
  };

  PolingResult r;
  const double step = (hi - lo) / static_cast<double>(n_scan - 1);
  std::size_t best = 0;
  for (std::size_t k = 0; k < n_scan; ++k) {
    const double period = lo + step * static_cast<double>(k);
    r.scan.emplace_back(period, objective(period));
    if (r.scan[k].second > r.scan[best].second) best = k;
  }
  if (!(r.scan[best].second > 0.0)) {
    throw NoOverlapError(fmt::format("no spectral overlap for periods in [{}, {}] um", lo, hi));
  }

  double a = r.scan[best == 0 ? 0 : best - 1].first;
  double b = r.scan[std::min(best + 1, n_scan - 1)].first;
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
  double f1 = objective(x1), f2 = objective(x2);
  while (b - a > tol) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = objective(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = objective(x2);
    }
  }
  const double mid = 0.5 * (a + b);
  const double fmid = objective(mid);
  if (fmid >= r.scan[best].second) {
    r.period = mid;
    r.overlap = fmid;
  } else {
    r.period = r.scan[best].first;
    r.overlap = r.scan[best].second;
  }
  return r;
}

cplx TwoPhotonState::visibility() const {
  if (psi1.values.empty() || psi2.values.empty()) return {0.0, 0.0};
  return spectral_visibility(psi1, psi2);
}

TwoPhotonState build_state(const GuidedMode& h00, const GuidedMode& h10, const GuidedMode& v00,
                           const GuidedMode& v10, double rate1, double rate2,
                           SpectralAmplitude psi1, SpectralAmplitude psi2) {
  if (rate1 < 0.0 || rate2 < 0.0) throw ContractError("negative production rate");
  if (!(rate1 + rate2 > 0.0)) throw DegenerateStateError("R1 + R2 = 0: no pairs after filtering");
  auto check = [](double rate, const SpectralAmplitude& psi, int which) {
    if (rate > 0.0 && (psi.values.empty() || !psi.normalized)) {
      throw ContractError(fmt::format("component {} needs a normalized amplitude", which));
    }
  };
  check(rate1, psi1, 1);
  check(rate2, psi2, 2);
  TwoPhotonState s;
  s.rate1 = rate1;
  s.rate2 = rate2;
  s.psi1 = rate1 > 0.0 ? std::move(psi1) : SpectralAmplitude{};
  s.psi2 = rate2 > 0.0 ? std::move(psi2) : SpectralAmplitude{};
  s.h00 = h00;
  s.h10 = h10;
  s.v00 = v00;
  s.v10 = v10;
  return s;
}

}  // namespace spdcwg
