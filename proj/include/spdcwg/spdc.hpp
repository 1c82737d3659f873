#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spdcwg/modesolver.hpp"
#include "spdcwg/sampling.hpp"

namespace spdcwg {

using cplx = std::complex<double>;

/// One down-conversion channel pump(l,m) -> H(i,j) + V(i',j').
struct ProcessSpec {
  ModeLabel pump{1, 0};
  ModeLabel h{0, 0};
  ModeLabel v{1, 0};
  double poling_period = 7.8;  // um
  int order = 1;
  double length_mm = 1.0;
  double pump_wavelength = 0.4;  // um

  void validate() const;
  double omega_pump() const;
  double length_um() const { return length_mm * 1e3; }
  std::string name() const;  // e.g. "10P-00H-10V"
};

/// k(omega) of the three fields of a process.
struct ProcessCurves {
  DispersionCurve pump;
  DispersionCurve h;
  DispersionCurve v;
};

/// Amplitude over the H-photon angular frequency (rad/s).
struct SpectralAmplitude {
  UniformAxis omega;
  std::vector<cplx> values;
  bool normalized = false;

  double norm2() const;  // integral of |values|^2 d omega
};

struct FilterSpec {
  double center = 0.0;  // rad/s
  double sigma = 0.0;   // rad/s

  void validate() const;
};

/// Uniform H-photon frequency grid spanning [lambda_min, lambda_max] in wavelength.
UniformAxis omega_grid(double lambda_min_um, double lambda_max_um, std::size_t n);

/// Integral of u_P (u_H u_V)^* over the transverse plane. Fields are brought onto
/// the H-mode grid by bilinear resampling when the grids differ.
cplx spatial_overlap(const GuidedMode& pump, const GuidedMode& h, const GuidedMode& v);

/// |alpha|^2 for every (H row, V column) pair.
Eigen::MatrixXd coupling_matrix(const GuidedMode& pump, std::span<const GuidedMode> h_modes,
                                std::span<const GuidedMode> v_modes);

/// k_P(wH + wV) - k_H(wH) - k_V(wV) - 2 pi p / Lambda, in 1/um.
double phase_mismatch(const ProcessSpec& process, const ProcessCurves& curves, double omega_h,
                      double omega_v);
/// (L/2) sinc[(L/2) dk], with L in um.
double phase_matching(const ProcessSpec& process, const ProcessCurves& curves, double omega_h,
                      double omega_v);

double sinc(double x);

struct BandMap {
  std::string process;
  UniformAxis lambda_h;  // um
  UniformAxis lambda_v;  // um
  Eigen::MatrixXd values;  // |alpha phi|^2, rows lambda_h, cols lambda_v
};

BandMap phase_matching_map(const ProcessSpec& process, const ProcessCurves& curves, cplx alpha,
                           const UniformAxis& lambda_h, const UniformAxis& lambda_v);

/// Points (lambda_H, lambda_V) on omega_H + omega_V = omega_P with lambda_H on the axis.
std::vector<std::pair<double, double>> energy_line(double pump_wavelength_um,
                                                   const UniformAxis& lambda_h);

/// cw-pump spectrum phi(omega) = phi(omega, omega_P - omega) on the H grid.
SpectralAmplitude process_spectrum(const ProcessSpec& process, const ProcessCurves& curves,
                                   const UniformAxis& omega);

double gaussian_filter(double omega, const FilterSpec& filter);

/// Integral of |alpha f phi|^2; no filter means f = 1.
double production_rate(cplx alpha, const SpectralAmplitude& phi,
                        const std::optional<FilterSpec>& filter);

/// alpha f phi / sqrt(R).
SpectralAmplitude normalized_amplitude(cplx alpha, const SpectralAmplitude& phi,
                                       const std::optional<FilterSpec>& filter, double rate);

/// Integral of conj(psi1) psi2 d omega.
cplx spectral_visibility(const SpectralAmplitude& psi1, const SpectralAmplitude& psi2);

struct BalanceResult {
  double center = 0.0;  // rad/s
  double rate1 = 0.0;
  double rate2 = 0.0;
  cplx visibility;
  std::size_t roots = 0;  // number of balanced centers found in the window
};

/// Filter center in [omega_lo, omega_hi] where R1 = R2. When several exist the one
/// transmitting the largest R1 + R2 is returned. Defaults to the spectrum grid span.
BalanceResult balance_filter_center(const SpectralAmplitude& phi1, const SpectralAmplitude& phi2,
                                    cplx alpha1, cplx alpha2, double sigma,
                                    std::optional<std::pair<double, double>> window = {});

/// |<a1 phi1, a2 phi2>| / (||a1 phi1|| ||a2 phi2||).
double spectral_overlap(const SpectralAmplitude& phi1, const SpectralAmplitude& phi2);

struct PolingResult {
  double period = 0.0;  // um
  double overlap = 0.0;
  std::vector<std::pair<double, double>> scan;  // (Lambda, overlap)
};

/// Lambda maximizing the spectral overlap of two processes sharing p and lambda_P.
/// Coarse scan of `n_scan` periods in [lo, hi], then golden-section refinement.
PolingResult optimize_poling(ProcessSpec p1, ProcessSpec p2, const ProcessCurves& c1,
                             const ProcessCurves& c2, const UniformAxis& omega, double lo,
                             double hi, std::size_t n_scan = 301, double tol = 1e-6);

/// Filtered two-photon state in the position representation:
/// sqrt(w1) psi1 u_H^00 u_V^10 + sqrt(w2) psi2 u_H^10 u_V^00.
struct TwoPhotonState {
  double rate1 = 0.0;
  double rate2 = 0.0;
  SpectralAmplitude psi1;
  SpectralAmplitude psi2;
  GuidedMode h00;
  GuidedMode h10;
  GuidedMode v00;
  GuidedMode v10;

  double total_rate() const { return rate1 + rate2; }
  double w1() const { return rate1 / (rate1 + rate2); }
  double w2() const { return rate2 / (rate1 + rate2); }
  /// Spectral visibility; zero when either component is absent.
  cplx visibility() const;
};

/// Packs the state. A component with zero rate may pass an empty amplitude.
TwoPhotonState build_state(const GuidedMode& h00, const GuidedMode& h10, const GuidedMode& v00,
                           const GuidedMode& v10, double rate1, double rate2,
                           SpectralAmplitude psi1, SpectralAmplitude psi2);

}  // namespace spdcwg
