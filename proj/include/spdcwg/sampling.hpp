#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace spdcwg {

/// Uniform 1D sampling axis. A periodic axis covers one full period with the
/// endpoint excluded, so its quadrature weights are all equal to the step.
struct UniformAxis {
  double first = 0.0;
  double step = 1.0;
  std::size_t count = 0;
  bool periodic = false;

  static UniformAxis linspace(double lo, double hi, std::size_t n);
  /// n points covering [-half_width, half_width) for periodic integrands.
  static UniformAxis full_period(double half_width, std::size_t n);

  double operator[](std::size_t i) const { return first + step * static_cast<double>(i); }
  double last() const { return (*this)[count - 1]; }
  double weight(std::size_t i) const;
  std::vector<double> values() const;

  bool operator==(const UniformAxis&) const = default;
};

bool same_axis(const UniformAxis& a, const UniformAxis& b, double rel_tol = 1e-12);

/// Trapezoidal quadrature of uniformly spaced samples.
double trapezoid(std::span<const double> f, double step);
std::complex<double> trapezoid(std::span<const std::complex<double>> f, double step);

/// Linear interpolation on a uniform axis; zero outside [first, last].
template <class T>
T interp_linear(const UniformAxis& axis, std::span<const T> f, double x) {
  const double s = (x - axis.first) / axis.step;
  const double n1 = static_cast<double>(axis.count - 1);
  if (s < -1e-9 || s > n1 + 1e-9) return T{};
  if (s <= 0.0) return f[0];
  if (s >= n1) return f[axis.count - 1];
  const auto i = static_cast<std::size_t>(std::floor(s));
  const double t = s - static_cast<double>(i);
  if (t == 0.0) return f[i];
  return f[i] * (1.0 - t) + f[i + 1] * t;
}

}  // namespace spdcwg
