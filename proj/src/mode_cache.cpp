#include "spdcwg/mode_cache.hpp"

#include <fmt/format.h>

#include "spdcwg/errors.hpp"

namespace spdcwg {

Json describe(const Grid2D& g) {
  return Json{{"y_min", g.y_min}, {"y_max", g.y_max}, {"z_min", g.z_min},
              {"z_max", g.z_max}, {"ny", g.ny},       {"nz", g.nz}};
}

Json describe(const ProfileParams& p) {
  return Json{{"width", p.width},
              {"depth", p.depth},
              {"contrast_y", p.contrast_y},
              {"contrast_z", p.contrast_z},
              {"cover_index", p.cover_index}};
}

Json describe(const SellmeierSet& s) {
  return Json{{"axis", axis_name(s.axis)},
              {"coefficients", s.coefficients},
              {"lambda_min", s.lambda_min},
              {"lambda_max", s.lambda_max}};
}

namespace {

Grid2D grid_from(const Json& j) {
  Grid2D g;
  g.y_min = j.at("y_min").get<double>();
  g.y_max = j.at("y_max").get<double>();
  g.z_min = j.at("z_min").get<double>();
  g.z_max = j.at("z_max").get<double>();
  g.ny = j.at("ny").get<std::size_t>();
  g.nz = j.at("nz").get<std::size_t>();
  return g;
}

}  // namespace

void save_modes(const std::filesystem::path& path, const std::vector<GuidedMode>& modes,
                std::size_t requested_max, const Json& extra) {
  Json header = extra;
  header["kind"] = "mode_set";
  header["requested_max_modes"] = requested_max;
  header["layout"] = "per mode, ny x nz row-major (y index slowest)";
  Json list = Json::array();
  std::vector<double> payload;
  for (const auto& m : modes) {
    list.push_back(Json{{"label", m.label.str()},
                        {"i", m.label.i},
                        {"j", m.label.j},
                        {"classified", m.classified},
                        {"axis", axis_name(m.axis)},
                        {"wavelength_um", m.wavelength},
                        {"n_eff", m.n_eff},
                        {"grid", describe(m.grid)}});
    for (Eigen::Index i = 0; i < m.field.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.field.cols(); ++j) payload.push_back(m.field(i, j));
    }
  }
  header["modes"] = std::move(list);
  write_container(path, header, payload);
}

std::pair<std::vector<GuidedMode>, std::size_t> load_modes(const std::filesystem::path& path) {
  const Container c = read_container(path);
  try {
    if (c.header.at("kind") != "mode_set") throw IoError(path.string() + ": not a mode set");
    std::vector<GuidedMode> modes;
    std::size_t offset = 0;
    for (const auto& e : c.header.at("modes")) {
      GuidedMode m;
      m.label = {e.at("i").get<int>(), e.at("j").get<int>()};
      m.classified = e.at("classified").get<bool>();
      m.axis = parse_axis(e.at("axis").get<std::string>());
      m.wavelength = e.at("wavelength_um").get<double>();
      m.n_eff = e.at("n_eff").get<double>();
      m.grid = grid_from(e.at("grid"));
      const auto ny = static_cast<Eigen::Index>(m.grid.ny);
      const auto nz = static_cast<Eigen::Index>(m.grid.nz);
      if (offset + m.grid.ny * m.grid.nz > c.payload.size()) {
        throw IoError(path.string() + ": payload shorter than header");
      }
      m.field.resize(ny, nz);
      for (Eigen::Index i = 0; i < ny; ++i) {
        for (Eigen::Index j = 0; j < nz; ++j) m.field(i, j) = c.payload[offset++];
      }
      modes.push_back(std::move(m));
    }
    if (offset != c.payload.size()) throw IoError(path.string() + ": payload longer than header");
    return {std::move(modes), c.header.at("requested_max_modes").get<std::size_t>()};
  } catch (const Json::exception& e) {
    throw IoError(fmt::format("{}: malformed mode-set header: {}", path.string(), e.what()));
  }
}

ModeCache::ModeCache(std::filesystem::path dir, Substrate substrate, Grid2D grid,
                     ProfileParams profile, bool rebuild)
    : dir_(std::move(dir)),
      substrate_(std::move(substrate)),
      grid_(grid),
      profile_(profile),
      rebuild_(rebuild) {}

std::string ModeCache::key(Axis axis, double lambda_um) const {
  const Json k{{"axis", axis_name(axis)},
               {"lambda_um", lambda_um},
               {"grid", describe(grid_)},
               {"profile", describe(profile_)},
               {"sellmeier", describe(substrate_.set(axis))},
               {"format", container_version}};
  return hex64(fnv1a(k.dump()));
}

std::filesystem::path ModeCache::path_for(Axis axis, double lambda_um) const {
  return dir_ / fmt::format("{}-{:.4f}-{}.modes", axis_name(axis), lambda_um * 1e3,
                            key(axis, lambda_um));
}

std::vector<GuidedMode> ModeCache::modes(Axis axis, double lambda_um, std::size_t max_modes) {
  const auto path = path_for(axis, lambda_um);
  if (!rebuild_ && std::filesystem::exists(path)) {
    auto [stored, stored_max] = load_modes(path);
    if (max_modes <= stored_max || stored.size() < stored_max) {
      if (stored.size() > max_modes) stored.resize(max_modes);
      ++hits_;
      return stored;
    }
  }
  ++misses_;
  auto solved = solve_modes(substrate_, axis, lambda_um, grid_, profile_, max_modes);
  const Json extra{{"key", key(axis, lambda_um)}, {"profile", describe(profile_)},
                   {"sellmeier", describe(substrate_.set(axis))}};
  std::lock_guard lock(write_mutex_);
  save_modes(path, solved, max_modes, extra);
  return solved;
}

ModeProvider ModeCache::provider() {
  return [this](Axis axis, double lambda_um, std::size_t max_modes) {
    return modes(axis, lambda_um, max_modes);
  };
}

}  // namespace spdcwg
