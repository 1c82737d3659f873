#pragma once

#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "spdcwg/config.hpp"
#include "spdcwg/mode_cache.hpp"
#include "spdcwg/spdc.hpp"

namespace spdcwg {

/// Both target processes with everything needed to build the state.
struct ProcessPair {
  ProcessSpec p1;  // pump -> 00_H + 10_V
  ProcessSpec p2;  // pump -> 10_H + 00_V
  ProcessCurves c1;
  ProcessCurves c2;
  cplx alpha1;
  cplx alpha2;
  std::optional<PolingResult> poling;  // set when the period was optimized
};

struct SpectraResult {
  SpectralAmplitude phi1;
  SpectralAmplitude phi2;
  double rate1 = 0.0;
  double rate2 = 0.0;
  std::optional<FilterSpec> filter;
  std::optional<BalanceResult> balance;
};

/// Lazily evaluated chain from modes to the two-photon state, backed by the
/// on-disk mode cache. Solves for distinct wavelengths run on up to `threads`
/// workers.
class Pipeline {
 public:
  explicit Pipeline(RunConfig config, std::size_t threads = 1);

  const RunConfig& config() const { return config_; }
  ModeCache& cache() { return *cache_; }

  std::vector<GuidedMode> modes(Axis axis, double lambda_um, std::size_t max_modes);
  /// Solve (or load) all wavelengths up front so the marching stays cache-hot.
  void prefetch(Axis axis, const std::vector<double>& lambdas, std::size_t max_modes);

  const std::vector<GuidedMode>& signal_modes(Axis axis);  // at the census wavelength
  const GuidedMode& signal_mode(Axis axis, ModeLabel label);
  const GuidedMode& pump_mode();

  const DispersionCurve& curve(Axis axis, ModeLabel label);
  const DispersionCurve& pump_curve();
  ProcessCurves curves(ModeLabel h, ModeLabel v);

  UniformAxis omega() const;
  const ProcessPair& processes();
  /// Filter center is balanced when a bandwidth is given.
  SpectraResult spectra(std::optional<double> sigma_nm);
  TwoPhotonState state(std::optional<double> sigma_nm);

  /// Bandwidth in rad/s of a wavelength-domain sigma at the degenerate wavelength.
  double sigma_omega(double sigma_nm) const;

 private:
  RunConfig config_;
  std::size_t threads_;
  std::unique_ptr<ModeCache> cache_;
  std::map<Axis, std::vector<GuidedMode>> signal_;
  std::optional<GuidedMode> pump_;
  std::map<std::pair<Axis, ModeLabel>, DispersionCurve> curves_;
  std::optional<DispersionCurve> pump_curve_;
  std::optional<ProcessPair> pair_;
};

/// Run `fn(i)` for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace spdcwg
