#pragma once

#include <cmath>
#include <filesystem>
#include <memory>
#include <string>

#include <Eigen/Dense>

#include "spdcwg/config.hpp"
#include "spdcwg/modesolver.hpp"
#include "spdcwg/pipeline.hpp"

namespace testing_support {

using namespace spdcwg;

inline std::filesystem::path shared_cache() { return SPDCWG_TEST_CACHE; }

inline std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("spdcwg-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Default-config pipeline backed by the build-tree mode cache.
inline Pipeline& default_pipeline() {
  static std::unique_ptr<Pipeline> p = [] {
    RunConfig c;
    c.cache_dir = shared_cache();
    return std::make_unique<Pipeline>(c, 1);
  }();
  return *p;
}

inline double hermite(int n, double x) {
  if (n == 0) return 1.0;
  double h0 = 1.0, h1 = 2.0 * x;
  for (int k = 1; k < n; ++k) {
    const double h2 = 2.0 * x * h1 - 2.0 * k * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

/// Hermite-Gauss field with waists wy, wz centered at (0, zc), unit grid norm.
inline GuidedMode hg_mode(const Grid2D& g, int i, int j, double wy = 1.5, double wz = 2.0,
                          double zc = -3.0, Axis axis = Axis::y) {
  GuidedMode m;
  m.label = {i, j};
  m.axis = axis;
  m.wavelength = 0.8;
  m.n_eff = 1.8 - 0.001 * (i + j);
  m.grid = g;
  m.field.resize(static_cast<Eigen::Index>(g.ny), static_cast<Eigen::Index>(g.nz));
  for (std::size_t a = 0; a < g.ny; ++a) {
    for (std::size_t b = 0; b < g.nz; ++b) {
      const double y = g.y(a) / wy, z = (g.z(b) - zc) / wz;
      const bool edge = a == 0 || b == 0 || a + 1 == g.ny || b + 1 == g.nz;
      m.field(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          edge ? 0.0 : hermite(i, y) * hermite(j, z) * std::exp(-0.5 * (y * y + z * z));
    }
  }
  m.field /= std::sqrt(m.field.squaredNorm() * g.hy() * g.hz());
  return m;
}

inline Grid2D small_grid() {
  Grid2D g;
  g.y_min = -8.0;
  g.y_max = 8.0;
  g.z_min = -12.0;
  g.z_max = 6.0;
  g.ny = 161;
  g.nz = 91;
  return g;
}

}  // namespace testing_support
