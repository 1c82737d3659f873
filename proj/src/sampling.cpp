#include "spdcwg/sampling.hpp"

#include <algorithm>

#include "spdcwg/errors.hpp"

namespace spdcwg {

UniformAxis UniformAxis::linspace(double lo, double hi, std::size_t n) {
  if (n < 2) throw GridError("linspace needs at least two points");
  if (!(hi > lo)) throw GridError("linspace needs hi > lo");
  return {lo, (hi - lo) / static_cast<double>(n - 1), n, false};
}

UniformAxis UniformAxis::full_period(double half_width, std::size_t n) {
  if (n < 2 || !(half_width > 0.0)) throw GridError("full_period needs n >= 2 and width > 0");
  return {-half_width, 2.0 * half_width / static_cast<double>(n), n, true};
}

double UniformAxis::weight(std::size_t i) const {
  if (periodic) return step;
  return (i == 0 || i + 1 == count) ? 0.5 * step : step;
}

std::vector<double> UniformAxis::values() const {
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i) v[i] = (*this)[i];
  return v;
}

bool same_axis(const UniformAxis& a, const UniformAxis& b, double rel_tol) {
  if (a.count != b.count || a.periodic != b.periodic) return false;
  const double scale = std::max({std::abs(a.first), std::abs(a.step) * a.count, 1e-300});
  return std::abs(a.first - b.first) <= rel_tol * scale &&
         std::abs(a.step - b.step) <= rel_tol * std::abs(a.step);
}

namespace {
template <class T>
T trapezoid_impl(std::span<const T> f, double step) {
  if (f.size() < 2) return T{};
  T sum = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) sum += f[i];
  return sum * step;
}
}  // namespace

double trapezoid(std::span<const double> f, double step) { return trapezoid_impl(f, step); }

std::complex<double> trapezoid(std::span<const std::complex<double>> f, double step) {
  return trapezoid_impl(f, step);
}

}  // namespace spdcwg
