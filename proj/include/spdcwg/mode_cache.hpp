#pragma once

#include <filesystem>
#include <atomic>
#include <mutex>
#include <string>
#include <vector>

#include "spdcwg/io.hpp"
#include "spdcwg/modesolver.hpp"

namespace spdcwg {

/// On-disk store of solved mode sets, one container per (axis, wavelength, grid,
/// profile, Sellmeier) key. Reads may run concurrently; writes go through one
/// mutex and land by atomic rename, so readers never see a partial file.
class ModeCache {
 public:
  ModeCache(std::filesystem::path dir, Substrate substrate, Grid2D grid, ProfileParams profile,
            bool rebuild = false);

  std::vector<GuidedMode> modes(Axis axis, double lambda_um, std::size_t max_modes);
  ModeProvider provider();

  std::string key(Axis axis, double lambda_um) const;
  std::filesystem::path path_for(Axis axis, double lambda_um) const;

  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }

 private:
  std::filesystem::path dir_;
  Substrate substrate_;
  Grid2D grid_;
  ProfileParams profile_;
  bool rebuild_;
  std::mutex write_mutex_;
  std::atomic<std::size_t> hits_ = 0;
  std::atomic<std::size_t> misses_ = 0;
};

Json describe(const Grid2D& grid);
Json describe(const ProfileParams& profile);
Json describe(const SellmeierSet& s);

void save_modes(const std::filesystem::path& path, const std::vector<GuidedMode>& modes,
                std::size_t requested_max, const Json& extra);
/// Loaded modes plus the max_modes the set was solved with.
std::pair<std::vector<GuidedMode>, std::size_t> load_modes(const std::filesystem::path& path);

}  // namespace spdcwg
