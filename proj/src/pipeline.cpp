#include "spdcwg/pipeline.hpp"

#include <numbers>

#include <fmt/format.h>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include "spdcwg/constants.hpp"
#include "spdcwg/errors.hpp"

namespace spdcwg {

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  tbb::task_arena arena(static_cast<int>(threads));
  arena.execute([&] { tbb::parallel_for(std::size_t{0}, n, fn); });
}

Pipeline::Pipeline(RunConfig config, std::size_t threads)
    : config_(std::move(config)), threads_(std::max<std::size_t>(threads, 1)) {
  config_.validate();
  cache_ = std::make_unique<ModeCache>(config_.cache_dir, config_.substrate(), config_.grid,
                                       config_.profile, config_.rebuild_cache);
}

std::vector<GuidedMode> Pipeline::modes(Axis axis, double lambda_um, std::size_t max_modes) {
  return cache_->modes(axis, lambda_um, max_modes);
}

void Pipeline::prefetch(Axis axis, const std::vector<double>& lambdas, std::size_t max_modes) {
  if (threads_ <= 1) return;
  parallel_for(lambdas.size(), threads_,
               [&](std::size_t i) { cache_->modes(axis, lambdas[i], max_modes); });
}

const std::vector<GuidedMode>& Pipeline::signal_modes(Axis axis) {
  auto it = signal_.find(axis);
  if (it == signal_.end()) {
    it = signal_
             .emplace(axis, modes(axis, config_.census_wavelength, config_.census_max_modes))
             .first;
  }
  return it->second;
}

const GuidedMode& Pipeline::signal_mode(Axis axis, ModeLabel label) {
  return require_mode(signal_modes(axis), label);
}

const GuidedMode& Pipeline::pump_mode() {
  if (!pump_) {
    const auto ms = modes(Axis::y, config_.pump_wavelength, config_.curve_max_modes);
    pump_ = require_mode(ms, config_.pump_mode);
  }
  return *pump_;
}

const DispersionCurve& Pipeline::curve(Axis axis, ModeLabel label) {
  const auto key = std::pair{axis, label};
  auto it = curves_.find(key);
  if (it != curves_.end()) return it->second;
  const double w0 = omega_from_wavelength(config_.curve_max);
  const double w1 = omega_from_wavelength(config_.curve_min);
  prefetch(axis, curve_wavelengths(w0, w1, config_.curve_samples), config_.curve_max_modes);
  auto c = dispersion_curve(cache_->provider(), axis, label, w0, w1, config_.curve_samples,
                            config_.curve_max_modes);
  return curves_.emplace(key, std::move(c)).first->second;
}

const DispersionCurve& Pipeline::pump_curve() {
  if (!pump_curve_) {
    const double w0 = omega_from_wavelength(config_.pump_curve_max);
    const double w1 = omega_from_wavelength(config_.pump_curve_min);
    prefetch(Axis::y, curve_wavelengths(w0, w1, config_.curve_samples), config_.curve_max_modes);
    pump_curve_ = dispersion_curve(cache_->provider(), Axis::y, config_.pump_mode, w0, w1,
                                   config_.curve_samples, config_.curve_max_modes);
  }
  return *pump_curve_;
}

ProcessCurves Pipeline::curves(ModeLabel h, ModeLabel v) {
  return {pump_curve(), curve(Axis::y, h), curve(Axis::z, v)};
}

UniformAxis Pipeline::omega() const {
  return omega_grid(config_.spectrum_min, config_.spectrum_max, config_.spectrum_points);
}

const ProcessPair& Pipeline::processes() {
  if (pair_) return *pair_;
  ProcessPair pp;
  ProcessSpec base;
  base.pump = config_.pump_mode;
  base.order = config_.order;
  base.length_mm = config_.length_mm;
  base.pump_wavelength = config_.pump_wavelength;
  pp.p1 = base;
  pp.p1.h = {0, 0};
  pp.p1.v = {1, 0};
  pp.p2 = base;
  pp.p2.h = {1, 0};
  pp.p2.v = {0, 0};
  pp.c1 = curves(pp.p1.h, pp.p1.v);
  pp.c2 = curves(pp.p2.h, pp.p2.v);
  const GuidedMode& up = pump_mode();
  pp.alpha1 = spatial_overlap(up, signal_mode(Axis::y, pp.p1.h), signal_mode(Axis::z, pp.p1.v));
  pp.alpha2 = spatial_overlap(up, signal_mode(Axis::y, pp.p2.h), signal_mode(Axis::z, pp.p2.v));
  if (config_.poling_period) {
    pp.p1.poling_period = pp.p2.poling_period = *config_.poling_period;
  } else {
    pp.poling = optimize_poling(pp.p1, pp.p2, pp.c1, pp.c2, omega(), config_.poling_min,
                                config_.poling_max, config_.poling_scan);
    pp.p1.poling_period = pp.p2.poling_period = pp.poling->period;
  }
  pair_ = std::move(pp);
  return *pair_;
}

double Pipeline::sigma_omega(double sigma_nm) const {
  const double lambda0 = 2.0 * config_.pump_wavelength;
  return 2.0 * std::numbers::pi * speed_of_light_um_per_s * (sigma_nm * 1e-3) /
         (lambda0 * lambda0);
}

SpectraResult Pipeline::spectra(std::optional<double> sigma_nm) {
  const ProcessPair& pp = processes();
  const UniformAxis w = omega();
  SpectraResult r;
  r.phi1 = process_spectrum(pp.p1, pp.c1, w);
  r.phi2 = process_spectrum(pp.p2, pp.c2, w);
  if (sigma_nm) {
    r.balance = balance_filter_center(r.phi1, r.phi2, pp.alpha1, pp.alpha2,
                                      sigma_omega(*sigma_nm));
    r.filter = FilterSpec{r.balance->center, sigma_omega(*sigma_nm)};
  }
  r.rate1 = production_rate(pp.alpha1, r.phi1, r.filter);
  r.rate2 = production_rate(pp.alpha2, r.phi2, r.filter);
  return r;
}

TwoPhotonState Pipeline::state(std::optional<double> sigma_nm) {
  const SpectraResult s = spectra(sigma_nm);
  const ProcessPair& pp = processes();
  SpectralAmplitude psi1, psi2;
  if (s.rate1 > 0.0) psi1 = normalized_amplitude(pp.alpha1, s.phi1, s.filter, s.rate1);
  if (s.rate2 > 0.0) psi2 = normalized_amplitude(pp.alpha2, s.phi2, s.filter, s.rate2);
  return build_state(signal_mode(Axis::y, {0, 0}), signal_mode(Axis::y, {1, 0}),
                     signal_mode(Axis::z, {0, 0}), signal_mode(Axis::z, {1, 0}), s.rate1, s.rate2,
                     std::move(psi1), std::move(psi2));
}

}  // namespace spdcwg
