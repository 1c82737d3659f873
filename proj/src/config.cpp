#include "spdcwg/config.hpp"

#include <charconv>
#include <functional>
#include <map>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "spdcwg/errors.hpp"
#include "spdcwg/mode_cache.hpp"

namespace spdcwg {

namespace {

std::string trimmed(const std::string& s) { return boost::algorithm::trim_copy(s); }

double to_double(const std::string& key, const std::string& raw) {
  const std::string s = trimmed(raw);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError(key, fmt::format("expected a number, got '{}'", raw));
  }
  return v;
}

template <class Int>
Int to_int(const std::string& key, const std::string& raw) {
  const std::string s = trimmed(raw);
  Int v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw ConfigError(key, fmt::format("expected an integer, got '{}'", raw));
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& raw) {
  const std::string s = boost::algorithm::to_lower_copy(trimmed(raw));
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw ConfigError(key, fmt::format("expected a boolean, got '{}'", raw));
}

std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> parts;
  boost::algorithm::split(parts, raw, boost::algorithm::is_any_of(", "),
                          boost::algorithm::token_compress_on);
  std::erase_if(parts, [](const std::string& p) { return p.empty(); });
  return parts;
}

std::vector<double> to_doubles(const std::string& key, const std::string& raw) {
  std::vector<double> out;
  for (const auto& p : split_list(raw)) out.push_back(to_double(key, p));
  if (out.empty()) throw ConfigError(key, "empty list");
  return out;
}

std::vector<ModeLabel> to_labels(const std::string& key, const std::string& raw) {
  std::vector<ModeLabel> out;
  for (const auto& p : split_list(raw)) {
    try {
      out.push_back(parse_label(p));
    } catch (const Error&) {
      throw ConfigError(key, fmt::format("bad mode label '{}'", p));
    }
  }
  if (out.empty()) throw ConfigError(key, "empty label list");
  return out;
}

bool is_word(const std::string& raw, std::initializer_list<const char*> words) {
  const std::string s = boost::algorithm::to_lower_copy(trimmed(raw));
  for (const char* w : words) {
    if (s == w) return true;
  }
  return false;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

template <class T>
Setter number(T RunConfig::*field) {
  return [field](RunConfig& c, const std::string& k, const std::string& v) {
    if constexpr (std::is_floating_point_v<T>) {
      c.*field = to_double(k, v);
    } else {
      c.*field = to_int<T>(k, v);
    }
  };
}

template <class T>
Setter nested(ProfileParams RunConfig::*outer, T ProfileParams::*field) {
  return [outer, field](RunConfig& c, const std::string& k, const std::string& v) {
    (c.*outer).*field = to_double(k, v);
  };
}

template <class T>
Setter grid(T Grid2D::*field) {
  return [field](RunConfig& c, const std::string& k, const std::string& v) {
    if constexpr (std::is_floating_point_v<T>) {
      c.grid.*field = to_double(k, v);
    } else {
      c.grid.*field = to_int<T>(k, v);
    }
  };
}

Setter labels(std::vector<ModeLabel> RunConfig::*field) {
  return [field](RunConfig& c, const std::string& k, const std::string& v) {
    c.*field = to_labels(k, v);
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"waveguide.width", nested(&RunConfig::profile, &ProfileParams::width)},
      {"waveguide.depth", nested(&RunConfig::profile, &ProfileParams::depth)},
      {"waveguide.contrast_y", nested(&RunConfig::profile, &ProfileParams::contrast_y)},
      {"waveguide.contrast_z", nested(&RunConfig::profile, &ProfileParams::contrast_z)},
      {"waveguide.cover_index", nested(&RunConfig::profile, &ProfileParams::cover_index)},
      {"sellmeier.lambda_min", number(&RunConfig::sellmeier_min)},
      {"sellmeier.lambda_max", number(&RunConfig::sellmeier_max)},
      {"grid.y_min", grid(&Grid2D::y_min)},
      {"grid.y_max", grid(&Grid2D::y_max)},
      {"grid.z_min", grid(&Grid2D::z_min)},
      {"grid.z_max", grid(&Grid2D::z_max)},
      {"grid.ny", grid(&Grid2D::ny)},
      {"grid.nz", grid(&Grid2D::nz)},
      {"modes.wavelength", number(&RunConfig::census_wavelength)},
      {"modes.band_min", number(&RunConfig::band_min)},
      {"modes.band_max", number(&RunConfig::band_max)},
      {"modes.max_modes", number(&RunConfig::census_max_modes)},
      {"modes.curve_min", number(&RunConfig::curve_min)},
      {"modes.curve_max", number(&RunConfig::curve_max)},
      {"modes.pump_curve_min", number(&RunConfig::pump_curve_min)},
      {"modes.pump_curve_max", number(&RunConfig::pump_curve_max)},
      {"modes.curve_samples", number(&RunConfig::curve_samples)},
      {"modes.curve_max_modes", number(&RunConfig::curve_max_modes)},
      {"overlaps.h_modes", labels(&RunConfig::overlap_h)},
      {"overlaps.v_modes", labels(&RunConfig::overlap_v)},
      {"process.pump_wavelength", number(&RunConfig::pump_wavelength)},
      {"process.pump_mode",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         const auto l = to_labels(k, v);
         if (l.size() != 1) throw ConfigError(k, "expected one mode label");
         c.pump_mode = l.front();
       }},
      {"process.poling_period",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (is_word(v, {"auto"})) {
           c.poling_period.reset();
         } else {
           c.poling_period = to_double(k, v);
         }
       }},
      {"process.order", number(&RunConfig::order)},
      {"process.length_mm", number(&RunConfig::length_mm)},
      {"process.poling_min", number(&RunConfig::poling_min)},
      {"process.poling_max", number(&RunConfig::poling_max)},
      {"process.poling_scan", number(&RunConfig::poling_scan)},
      {"spectrum.lambda_min", number(&RunConfig::spectrum_min)},
      {"spectrum.lambda_max", number(&RunConfig::spectrum_max)},
      {"spectrum.points", number(&RunConfig::spectrum_points)},
      {"spectrum.overlay_sigma_nm", number(&RunConfig::overlay_sigma_nm)},
      {"filter.sigma_nm",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (is_word(v, {"none", "off"})) {
           c.filter_sigma_nm.reset();
         } else {
           c.filter_sigma_nm = to_double(k, v);
         }
       }},
      {"sweep.sigma_nm",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.sweep_sigma_nm = to_doubles(k, v);
       }},
      {"pm_map.length_mm", number(&RunConfig::map_length_mm)},
      {"pm_map.lambda_min", number(&RunConfig::map_min)},
      {"pm_map.lambda_max", number(&RunConfig::map_max)},
      {"pm_map.points", number(&RunConfig::map_points)},
      {"pm_map.h_modes", labels(&RunConfig::map_h)},
      {"pm_map.v_modes", labels(&RunConfig::map_v)},
      {"tomography.weights",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (is_word(v, {"auto"})) {
           c.tomo_weights.reset();
           return;
         }
         const auto w = to_doubles(k, v);
         if (w.size() != 2) throw ConfigError(k, "expected 'auto' or two weights");
         c.tomo_weights = std::pair{w[0], w[1]};
       }},
      {"tomography.scan_ny", number(&RunConfig::scan_ny)},
      {"tomography.scan_nk", number(&RunConfig::scan_nk)},
      {"tomography.scan_y_half", number(&RunConfig::scan_y_half)},
      {"tomography.scan_k_half", number(&RunConfig::scan_k_half)},
      {"tomography.snr",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.snr = is_word(v, {"inf", "none", "off"}) ? std::numeric_limits<double>::infinity()
                                                    : to_double(k, v);
       }},
      {"tomography.rho_points", number(&RunConfig::rho_points)},
      {"tomography.rho_half", number(&RunConfig::rho_half)},
      {"tomography.tilt_wavelength", number(&RunConfig::tilt_wavelength)},
      {"bell.visibility",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (is_word(v, {"auto"})) {
           c.bell_visibility.reset();
         } else {
           c.bell_visibility = to_double(k, v);
         }
       }},
      {"bell.zeta_max", number(&RunConfig::zeta_max)},
      {"bell.map_v_points", number(&RunConfig::map_v_points)},
      {"bell.map_zeta_points", number(&RunConfig::map_zeta_points)},
      {"run.seed",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.seed = to_int<std::uint64_t>(k, v);
       }},
      {"run.cache_dir",
       [](RunConfig& c, const std::string&, const std::string& v) { c.cache_dir = trimmed(v); }},
      {"run.rebuild_cache",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.rebuild_cache = to_bool(k, v);
       }},
  };
  return table;
}

Json labels_json(const std::vector<ModeLabel>& ls) {
  Json a = Json::array();
  for (const auto& l : ls) a.push_back(l.str());
  return a;
}

}  // namespace

RunConfig RunConfig::load(const std::filesystem::path& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("<file>", fmt::format("{}: {}", path.string(), e.message()));
  }
  RunConfig c;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError(section, "key outside of any [section]");
    for (const auto& [name, value] : body) c.set(section + "." + name, value.data());
  }
  return c;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError(key, "unknown configuration key");
  it->second(*this, key, value);
}

void RunConfig::validate() const {
  auto need = [](bool ok, const char* field, const char* what) {
    if (!ok) throw ConfigError(field, what);
  };
  try {
    profile.validate();
  } catch (const Error& e) {
    throw ConfigError("waveguide", e.what());
  }
  need(sellmeier_min > 0.0 && sellmeier_max > sellmeier_min, "sellmeier.lambda_min",
       "need 0 < lambda_min < lambda_max");
  try {
    grid.validate(profile);
  } catch (const Error& e) {
    throw ConfigError("grid", e.what());
  }
  need(band_min > 0.0 && band_max > band_min, "modes.band_min", "need 0 < band_min < band_max");
  need(curve_min > 0.0 && curve_max > curve_min, "modes.curve_min",
       "need 0 < curve_min < curve_max");
  need(pump_curve_min > 0.0 && pump_curve_max > pump_curve_min, "modes.pump_curve_min",
       "need 0 < pump_curve_min < pump_curve_max");
  need(pump_curve_min <= pump_wavelength && pump_wavelength <= pump_curve_max,
       "process.pump_wavelength", "pump wavelength must lie inside the pump curve band");
  need(curve_samples >= 15, "modes.curve_samples", "need at least 15 samples");
  need(census_max_modes >= 1, "modes.max_modes", "must be >= 1");
  need(curve_max_modes >= 2, "modes.curve_max_modes", "must be >= 2");
  need(!poling_period || *poling_period > 0.0, "process.poling_period", "must be positive");
  need(order >= 1, "process.order", "must be >= 1");
  need(length_mm > 0.0, "process.length_mm", "must be positive");
  need(poling_min > 0.0 && poling_max > poling_min, "process.poling_min",
       "need 0 < poling_min < poling_max");
  need(poling_scan >= 3, "process.poling_scan", "must be >= 3");
  need(spectrum_min > 0.0 && spectrum_max > spectrum_min, "spectrum.lambda_min",
       "need 0 < lambda_min < lambda_max");
  need(spectrum_points >= 16, "spectrum.points", "must be >= 16");
  need(!filter_sigma_nm || *filter_sigma_nm > 0.0, "filter.sigma_nm", "must be positive");
  need(overlay_sigma_nm > 0.0, "spectrum.overlay_sigma_nm", "must be positive");
  for (double s : sweep_sigma_nm) need(s > 0.0, "sweep.sigma_nm", "bandwidths must be positive");
  need(map_length_mm > 0.0, "pm_map.length_mm", "must be positive");
  need(map_min > 0.0 && map_max > map_min, "pm_map.lambda_min", "need 0 < lambda_min < lambda_max");
  need(map_points >= 2, "pm_map.points", "must be >= 2");
  if (tomo_weights) {
    need(tomo_weights->first >= 0.0 && tomo_weights->second >= 0.0 &&
             std::abs(tomo_weights->first + tomo_weights->second - 1.0) < 1e-9,
         "tomography.weights", "weights must be non-negative and sum to 1");
  }
  need(scan_ny >= 2 && scan_nk >= 2, "tomography.scan_ny", "scan grid needs >= 2 points per axis");
  need(scan_y_half > 0.0 && scan_k_half > 0.0, "tomography.scan_y_half", "must be positive");
  need(snr > 0.0, "tomography.snr", "must be positive (or inf)");
  need(rho_points >= 4 && rho_half > 0.0, "tomography.rho_points", "bad reconstruction grid");
  need(tilt_wavelength > 0.0, "tomography.tilt_wavelength", "must be positive");
  need(!bell_visibility || (*bell_visibility >= 0.0 && *bell_visibility <= 1.0),
       "bell.visibility", "must lie in [0, 1]");
  need(zeta_max > 0.0, "bell.zeta_max", "must be positive");
  need(map_v_points >= 2 && map_zeta_points >= 2, "bell.map_v_points", "need >= 2 points");
}

Substrate RunConfig::substrate() const {
  Substrate s;
  for (Axis a : {Axis::y, Axis::z}) {
    s.set(a).lambda_min = sellmeier_min;
    s.set(a).lambda_max = sellmeier_max;
  }
  return s;
}

Json RunConfig::canonical() const {
  const Substrate s = substrate();
  auto opt = [](const auto& o) -> Json { return o ? Json(*o) : Json(nullptr); };
  return Json{
      {"waveguide", describe(profile)},
      {"sellmeier", {describe(s.y), describe(s.z)}},
      {"grid", describe(grid)},
      {"modes",
       {{"wavelength", census_wavelength},
        {"band", {band_min, band_max}},
        {"max_modes", census_max_modes},
        {"curve", {curve_min, curve_max}},
        {"pump_curve", {pump_curve_min, pump_curve_max}},
        {"curve_samples", curve_samples},
        {"curve_max_modes", curve_max_modes}}},
      {"overlaps", {{"h", labels_json(overlap_h)}, {"v", labels_json(overlap_v)}}},
      {"process",
       {{"pump_wavelength", pump_wavelength},
        {"pump_mode", pump_mode.str()},
        {"poling_period", opt(poling_period)},
        {"order", order},
        {"length_mm", length_mm},
        {"poling_search", {poling_min, poling_max, poling_scan}}}},
      {"spectrum",
       {{"band", {spectrum_min, spectrum_max}},
        {"points", spectrum_points},
        {"overlay_sigma_nm", overlay_sigma_nm}}},
      {"filter", {{"sigma_nm", opt(filter_sigma_nm)}}},
      {"sweep", {{"sigma_nm", sweep_sigma_nm}}},
      {"pm_map",
       {{"length_mm", map_length_mm},
        {"band", {map_min, map_max}},
        {"points", map_points},
        {"h", labels_json(map_h)},
        {"v", labels_json(map_v)}}},
      {"tomography",
       {{"weights", tomo_weights ? Json{tomo_weights->first, tomo_weights->second}
                                 : Json("auto")},
        {"scan", {scan_ny, scan_nk, scan_y_half, scan_k_half}},
        {"snr", std::isfinite(snr) ? Json(snr) : Json("inf")},
        {"rho", {rho_points, rho_half}},
        {"tilt_wavelength", tilt_wavelength}}},
      {"bell",
       {{"visibility", opt(bell_visibility)},
        {"zeta_max", zeta_max},
        {"map", {map_v_points, map_zeta_points}}}},
      {"seed", opt(seed)},
  };
}

std::string RunConfig::hash() const { return hex64(fnv1a(canonical().dump())); }

}  // namespace spdcwg
