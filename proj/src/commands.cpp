#include "spdcwg/commands.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "spdcwg/bell.hpp"
#include "spdcwg/constants.hpp"
#include "spdcwg/errors.hpp"
#include "spdcwg/tomography.hpp"

namespace spdcwg {

namespace {

namespace fs = std::filesystem;

CsvTable table(const Pipeline& p, const std::string& command, std::vector<std::string> columns) {
  CsvTable t(std::move(columns));
  t.comment("spdcwg " + command);
  t.comment("config_hash " + p.config().hash());
  return t;
}

Json report(const Pipeline& p, const std::string& command) {
  return Json{{"command", command}, {"config_hash", p.config().hash()}};
}

Json finish(const fs::path& out, const std::string& command, Json summary) {
  write_file_atomic(out / (command + ".json"), summary.dump(2) + "\n");
  return summary;
}

Json tagged(const Pipeline& p, const std::string& command) {
  return Json{{"command", command}, {"config_hash", p.config().hash()}};
}

Json cplx_json(cplx z) { return Json{{"re", z.real()}, {"im", z.imag()}, {"abs", std::abs(z)}}; }

double peak_wavelength_nm(const SpectralAmplitude& s, cplx alpha) {
  std::size_t best = 0;
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    if (std::norm(alpha * s.values[i]) > std::norm(alpha * s.values[best])) best = i;
  }
  return wavelength_from_omega(s.omega[best]) * 1e3;
}

}  // namespace

Json cmd_solve_modes(Pipeline& p, const fs::path& out) {
  const RunConfig& c = p.config();
  const std::vector<double> lambdas = {c.band_min, c.census_wavelength, c.band_max};
  for (Axis axis : {Axis::y, Axis::z}) p.prefetch(axis, lambdas, c.census_max_modes);

  auto census = table(p, "solve-modes",
                      {"axis", "rank", "label", "classified", "n_eff", "n_substrate", "wavelength_um"});
  census.comment("label: node counts (i along y, j along z); classified=0 marks a hybrid pattern");
  auto band = table(p, "solve-modes", {"axis", "wavelength_um", "guided_modes", "truncated"});
  Json summary = report(p, "solve-modes");
  const Substrate sub = c.substrate();
  for (Axis axis : {Axis::y, Axis::z}) {
    const auto& ms = p.signal_modes(axis);
    const double ns = substrate_index(sub, axis, c.census_wavelength);
    Json labels = Json::array();
    for (std::size_t r = 0; r < ms.size(); ++r) {
      census.text_row({std::string(axis_name(axis)), std::to_string(r), ms[r].label.str(),
                       ms[r].classified ? "1" : "0", format_number(ms[r].n_eff),
                       format_number(ns), format_number(ms[r].wavelength)});
      labels.push_back(ms[r].label.str() + (ms[r].classified ? "" : "?"));
    }
    save_modes(out / fmt::format("modes_{}.modes", axis_name(axis)), ms, c.census_max_modes,
               tagged(p, "solve-modes"));
    Json counts = Json::object();
    std::size_t band_count = std::numeric_limits<std::size_t>::max();
    bool truncated_any = false;
    for (double lam : lambdas) {
      const auto set = p.modes(axis, lam, c.census_max_modes);
      const bool truncated = set.size() >= c.census_max_modes;
      truncated_any = truncated_any || truncated;
      band.text_row({std::string(axis_name(axis)), format_number(lam), std::to_string(set.size()),
                     truncated ? "1" : "0"});
      counts[format_number(lam)] = set.size();
      band_count = std::min(band_count, set.size());
    }
    summary[std::string(axis_name(axis))] = {{"guided_at_census_wavelength", ms.size()},
                                             {"labels", labels},
                                             {"counts_by_wavelength", counts},
                                             {"guided_across_band", band_count},
                                             {"possibly_truncated", truncated_any}};
  }
  census.write(out / "census.csv");
  band.write(out / "census_band.csv");
  return finish(out, "solve-modes", summary);
}

Json cmd_overlaps(Pipeline& p, const fs::path& out) {
  const RunConfig& c = p.config();
  const GuidedMode& pump = p.pump_mode();
  std::vector<GuidedMode> hs, vs;
  for (const auto& l : c.overlap_h) hs.push_back(p.signal_mode(Axis::y, l));
  for (const auto& l : c.overlap_v) vs.push_back(p.signal_mode(Axis::z, l));

  std::vector<std::string> cols = {"h_mode"};
  for (const auto& l : c.overlap_v) cols.push_back("v" + l.str());
  auto eff = table(p, "overlaps", cols);
  eff.comment(fmt::format("|alpha|^2 for pump {}P at {} um; rows H modes, columns V modes",
                          c.pump_mode.str(), c.pump_wavelength));
  auto amp = table(p, "overlaps", cols);
  amp.comment("signed overlap alpha (real fields)");
  Json entries = Json::array();
  double best = -1.0, second = -1.0;
  std::string best_name, second_name;
  for (std::size_t a = 0; a < hs.size(); ++a) {
    std::vector<double> e, s;
    for (std::size_t b = 0; b < vs.size(); ++b) {
      const cplx al = spatial_overlap(pump, hs[a], vs[b]);
      e.push_back(std::norm(al));
      s.push_back(al.real());
      const std::string name = fmt::format("{}P-{}H-{}V", c.pump_mode.str(), hs[a].label.str(),
                                           vs[b].label.str());
      entries.push_back({{"process", name}, {"alpha", al.real()}, {"efficiency", std::norm(al)}});
      if (std::norm(al) > best) {
        second = best;
        second_name = best_name;
        best = std::norm(al);
        best_name = name;
      } else if (std::norm(al) > second) {
        second = std::norm(al);
        second_name = name;
      }
    }
    eff.row(hs[a].label.str(), e);
    amp.row(hs[a].label.str(), s);
  }
  eff.write(out / "coupling_matrix.csv");
  amp.write(out / "overlap_amplitudes.csv");
  Json summary = report(p, "overlaps");
  summary["pump_mode"] = c.pump_mode.str();
  summary["entries"] = entries;
  summary["strongest"] = {best_name, second_name};
  return finish(out, "overlaps", summary);
}

Json cmd_pm_map(Pipeline& p, const fs::path& out) {
  const RunConfig& c = p.config();
  const ProcessPair& pp = p.processes();
  const UniformAxis lam = UniformAxis::linspace(c.map_min, c.map_max, c.map_points);
  const GuidedMode& pump = p.pump_mode();

  Json maps = Json::array();
  double strongest = 0.0;
  std::vector<std::tuple<ProcessSpec, cplx>> todo;
  for (const auto& h : c.map_h) {
    for (const auto& v : c.map_v) {
      ProcessSpec s = pp.p1;
      s.h = h;
      s.v = v;
      s.length_mm = c.map_length_mm;
      const cplx al = spatial_overlap(pump, p.signal_mode(Axis::y, h), p.signal_mode(Axis::z, v));
      strongest = std::max(strongest, std::norm(al));
      todo.emplace_back(s, al);
    }
  }
  const auto line = energy_line(c.pump_wavelength, lam);
  for (const auto& [spec, al] : todo) {
    if (std::norm(al) < 1e-8 * strongest) {
      maps.push_back({{"process", spec.name()}, {"alpha", al.real()}, {"skipped", "parity-forbidden"}});
      continue;
    }
    const ProcessCurves curves = p.curves(spec.h, spec.v);
    const BandMap m = phase_matching_map(spec, curves, al, lam, lam);
    auto t = table(p, "pm-map", {"lambda_h_um", "lambda_v_um", "alpha2_phi2"});
    t.comment(fmt::format("{} L = {} mm, Lambda = {} um, order {}", spec.name(), spec.length_mm,
                          spec.poling_period, spec.order));
    for (std::size_t i = 0; i < lam.count; ++i) {
      for (std::size_t j = 0; j < lam.count; ++j) {
        t.row({lam[i], lam[j], m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))});
      }
    }
    t.write(out / fmt::format("pm_map_{}.csv", spec.name()));
    // Band strength along the energy-conservation line.
    double peak = 0.0, at = 0.0;
    for (const auto& [lh, lv] : line) {
      if (lv < c.map_min || lv > c.map_max) continue;
      const double phi = phase_matching(spec, curves, omega_from_wavelength(lh),
                                        omega_from_wavelength(lv));
      const double val = std::norm(al) * phi * phi;
      if (val > peak) {
        peak = val;
        at = lh;
      }
    }
    maps.push_back({{"process", spec.name()},
                    {"alpha", al.real()},
                    {"max", m.values.maxCoeff()},
                    {"energy_line_peak", peak},
                    {"energy_line_peak_lambda_h_um", at}});
  }
  auto e = table(p, "pm-map", {"lambda_h_um", "lambda_v_um"});
  e.comment(fmt::format("omega_H + omega_V = omega_P for lambda_P = {} um", c.pump_wavelength));
  for (const auto& [lh, lv] : line) e.row({lh, lv});
  e.write(out / "energy_line.csv");
  Json summary = report(p, "pm-map");
  summary["length_mm"] = c.map_length_mm;
  summary["poling_period_um"] = pp.p1.poling_period;
  summary["processes"] = maps;
  return finish(out, "pm-map", summary);
}

Json cmd_spectra(Pipeline& p, const fs::path& out) {
  const RunConfig& c = p.config();
  const ProcessPair& pp = p.processes();
  const SpectraResult free = p.spectra(std::nullopt);
  const SpectraResult overlay = p.spectra(c.overlay_sigma_nm);
  const TwoPhotonState st = p.state(std::nullopt);

  auto t = table(p, "spectra", {"omega_rad_s", "lambda_h_um", "lambda_v_um", "process1",
                                "process2", "filter"});
  t.comment(fmt::format("process1 = |alpha1 phi1|^2 ({}), process2 = |alpha2 phi2|^2 ({})",
                        pp.p1.name(), pp.p2.name()));
  t.comment(fmt::format("filter: balanced Gaussian, sigma = {} nm", c.overlay_sigma_nm));
  const double wp = pp.p1.omega_pump();
  for (std::size_t i = 0; i < free.phi1.omega.count; ++i) {
    const double w = free.phi1.omega[i];
    t.row({w, wavelength_from_omega(w), wavelength_from_omega(wp - w),
           std::norm(pp.alpha1 * free.phi1.values[i]), std::norm(pp.alpha2 * free.phi2.values[i]),
           gaussian_filter(w, *overlay.filter)});
  }
  t.write(out / "spectra.csv");

  Json summary = report(p, "spectra");
  summary["poling_period_um"] = pp.p1.poling_period;
  if (pp.poling) {
    summary["poling_optimized"] = true;
    summary["poling_overlap"] = pp.poling->overlap;
    auto s = table(p, "spectra", {"poling_period_um", "spectral_overlap"});
    for (const auto& [l, o] : pp.poling->scan) s.row({l, o});
    s.write(out / "poling_scan.csv");
  } else {
    summary["poling_optimized"] = false;
  }
  const double total = free.rate1 + free.rate2;
  summary["alpha1"] = pp.alpha1.real();
  summary["alpha2"] = pp.alpha2.real();
  summary["unfiltered"] = {{"rate1", free.rate1},
                           {"rate2", free.rate2},
                           {"w1", free.rate1 / total},
                           {"w2", free.rate2 / total},
                           {"visibility", cplx_json(st.visibility())},
                           {"peak1_nm", peak_wavelength_nm(free.phi1, pp.alpha1)},
                           {"peak2_nm", peak_wavelength_nm(free.phi2, pp.alpha2)}};
  summary["overlay_filter"] = {
      {"sigma_nm", c.overlay_sigma_nm},
      {"center_nm", wavelength_from_omega(overlay.filter->center) * 1e3},
      {"w1", overlay.rate1 / (overlay.rate1 + overlay.rate2)},
      {"visibility", cplx_json(overlay.balance->visibility)},
      {"rate_normalized", (overlay.rate1 + overlay.rate2) / total}};
  if (c.filter_sigma_nm) {
    const TwoPhotonState fs_ = p.state(c.filter_sigma_nm);
    summary["filtered"] = {{"sigma_nm", *c.filter_sigma_nm},
                           {"w1", fs_.w1()},
                           {"w2", fs_.w2()},
                           {"visibility", cplx_json(fs_.visibility())},
                           {"rate_normalized", fs_.total_rate() / total}};
  }
  return finish(out, "spectra", summary);
}

Json cmd_visibility_sweep(Pipeline& p, const fs::path& out) {
  const RunConfig& c = p.config();
  p.processes();
  const SpectraResult free = p.spectra(std::nullopt);
  const double total = free.rate1 + free.rate2;
  std::vector<SpectraResult> rows(c.sweep_sigma_nm.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = p.spectra(c.sweep_sigma_nm[i]);

  auto t = table(p, "visibility-sweep", {"sigma_nm", "sigma_rad_s", "center_nm", "abs_v",
                                         "arg_v", "rate_normalized", "balanced_roots"});
  t.comment("rate_normalized = (R1 + R2) / (R1 + R2 without filter)");
  Json list = Json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const double rate = (r.rate1 + r.rate2) / total;
    t.row({c.sweep_sigma_nm[i], r.filter->sigma, wavelength_from_omega(r.filter->center) * 1e3,
           std::abs(r.balance->visibility), std::arg(r.balance->visibility), rate,
           static_cast<double>(r.balance->roots)});
    list.push_back({{"sigma_nm", c.sweep_sigma_nm[i]},
                    {"abs_v", std::abs(r.balance->visibility)},
                    {"rate_normalized", rate}});
  }
  t.write(out / "visibility_sweep.csv");
  Json summary = report(p, "visibility-sweep");
  summary["unfiltered_abs_v"] = std::abs(p.state(std::nullopt).visibility());
  summary["rows"] = list;
  return finish(out, "visibility-sweep", summary);
}

Json cmd_tomography(Pipeline& p, const fs::path& out) {
  const RunConfig& c = p.config();
  const bool noisy = std::isfinite(c.snr);
  if (noisy && !c.seed) throw ConfigError("run.seed", "a seed is required when scan noise is enabled");
  const std::uint64_t seed = c.seed.value_or(0);

  double w1 = 0.0, w2 = 0.0;
  if (c.tomo_weights) {
    std::tie(w1, w2) = *c.tomo_weights;
  } else {
    const TwoPhotonState st = p.state(c.filter_sigma_nm);
    w1 = st.w1();
    w2 = st.w2();
  }
  const GuidedMode& u00 = p.signal_mode(Axis::y, {0, 0});
  const GuidedMode& u10 = p.signal_mode(Axis::y, {1, 0});
  const DensityMatrix1D rho = reduce_modes(u00, u10, w1, w2);
  const WignerMap clean = wigner_from_density(rho, half_lattice(rho.y), nyquist_k_axis(rho.y));
  const UniformAxis sy = UniformAxis::linspace(-c.scan_y_half, c.scan_y_half, c.scan_ny);
  const UniformAxis sk = UniformAxis::linspace(-c.scan_k_half, c.scan_k_half, c.scan_nk);
  const WignerMap scan = simulate_noisy_scan(wigner_from_density(rho, sy, sk), c.snr, sy, sk, seed);
  const UniformAxis target = UniformAxis::linspace(-c.rho_half, c.rho_half, c.rho_points);
  const DensityMatrix1D rec = density_from_wigner(scan, target);
  const Eigenpairs eig = diagonalize(rec);

  const Eigen::VectorXd ref00 = marginal_profile(u00, target);
  const Eigen::VectorXd ref10 = marginal_profile(u10, target);
  const double f[2][2] = {{mode_fidelity(eig.vectors[0], ref00), mode_fidelity(eig.vectors[0], ref10)},
                          {mode_fidelity(eig.vectors[1], ref00), mode_fidelity(eig.vectors[1], ref10)}};
  // Eigenvector index matched to the 00 and 10 references.
  const bool straight = f[0][0] + f[1][1] >= f[0][1] + f[1][0];
  const std::size_t i00 = straight ? 0 : 1, i10 = straight ? 1 : 0;

  const Json tag = tagged(p, "tomography");
  write_wigner(out / "wigner_clean.wig", clean, tag);
  write_wigner(out / "wigner_scan.wig", scan, tag);
  write_density(out / "rho_true.rho", rho, tag);
  write_density(out / "rho_reconstructed.rho", rec, tag);

  const double tilt = c.tilt_wavelength / (2.0 * std::numbers::pi);
  for (const auto& [name, map] : {std::pair{"wigner_clean.csv", &clean}, {"wigner_scan.csv", &scan}}) {
    auto t = table(p, "tomography", {"y_um", "k_rad_per_um", "theta_rad", "w"});
    t.comment(fmt::format("theta = k lambda / (2 pi) at lambda = {} um", c.tilt_wavelength));
    for (std::size_t i = 0; i < map->y.count; ++i) {
      for (std::size_t j = 0; j < map->k.count; ++j) {
        t.row({map->y[i], map->k[j], map->k[j] * tilt,
               map->w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))});
      }
    }
    t.write(out / name);
  }
  auto rt = table(p, "tomography", {"y_um", "y2_um", "re", "im"});
  for (std::size_t i = 0; i < target.count; ++i) {
    for (std::size_t j = 0; j < target.count; ++j) {
      const cplx v = rec.rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      rt.row({target[i], target[j], v.real(), v.imag()});
    }
  }
  rt.write(out / "rho_reconstructed.csv");
  auto ev = table(p, "tomography", {"y_um", "u00_re", "u00_im", "u10_re", "u10_im", "ref00", "ref10"});
  for (std::size_t i = 0; i < target.count; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    ev.row({target[i], eig.vectors[i00](k).real(), eig.vectors[i00](k).imag(),
            eig.vectors[i10](k).real(), eig.vectors[i10](k).imag(), ref00(k), ref10(k)});
  }
  ev.write(out / "eigenvectors.csv");

  Json values = Json::array();
  for (std::size_t i = 0; i < std::min<std::size_t>(8, eig.values.size()); ++i) values.push_back(eig.values[i]);
  Json summary = report(p, "tomography");
  summary["weights"] = {w1, w2};
  summary["seed"] = noisy ? Json(seed) : Json(nullptr);
  summary["noise_sigma"] = scan.noise ? scan.noise->sigma : 0.0;
  summary["clean_integral"] = clean.integral();
  summary["clean_w00"] = clean.at(0.0, 0.0);
  summary["reconstructed_trace"] = rec.trace();
  summary["eigenvalues"] = values;
  summary["fidelity_00"] = f[i00][0];
  summary["fidelity_10"] = f[i10][1];
  summary["degenerate_top"] = eig.degenerate_top;
  summary["noise_floor"] = eig.noise_floor;
  summary["separability"] = {{"H00", separability(u00)}, {"H10", separability(u10)}};
  return finish(out, "tomography", summary);
}

Json cmd_bell(Pipeline& p, const fs::path& out) {
  const RunConfig& c = p.config();
  const TwoPhotonState st = p.state(c.filter_sigma_nm);
  const cplx v = c.bell_visibility ? cplx{*c.bell_visibility, 0.0} : st.visibility();
  const DisplacementOptimum opt = optimize_displacement(st, v, c.zeta_max);

  std::vector<double> vs, zs;
  const UniformAxis va = UniformAxis::linspace(0.0, 1.0, c.map_v_points);
  const UniformAxis za = UniformAxis::linspace(0.0, opt.zeta_limit, c.map_zeta_points);
  for (std::size_t i = 0; i < va.count; ++i) vs.push_back(va[i]);
  for (std::size_t i = 0; i < za.count; ++i) zs.push_back(za[i]);
  const Eigen::MatrixXd m = violation_map(st, vs, zs);

  auto t = table(p, "bell", {"visibility", "zeta_um", "abs_b"});
  t.comment("|B| maximized over the two sign placements of the (zeta, 0) setting family");
  for (std::size_t i = 0; i < vs.size(); ++i) {
    for (std::size_t j = 0; j < zs.size(); ++j) {
      t.row({vs[i], zs[j], m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))});
    }
  }
  t.write(out / "violation_map.csv");

  Json summary = report(p, "bell");
  summary["w1"] = st.w1();
  summary["w2"] = st.w2();
  summary["visibility"] = cplx_json(v);
  summary["c00"] = parity_correlation(st, v, 0.0, 0.0);
  summary["b_zero_settings"] = chsh(st, v, BellSettings{}).b;
  summary["optimum"] = {{"zeta_um", opt.zeta},
                        {"abs_b", opt.abs_b},
                        {"b", opt.b},
                        {"placement", placement_name(opt.placement)},
                        {"zeta_limit_um", opt.zeta_limit},
                        {"violates", opt.abs_b > chsh_classical_bound}};
  summary["map_max"] = m.maxCoeff();
  summary["classical_bound"] = chsh_classical_bound;
  summary["quantum_bound"] = chsh_quantum_bound;
  return finish(out, "bell", summary);
}

Json run_command(const std::string& name, Pipeline& p, const fs::path& out) {
  fs::create_directories(out);
  if (name == "solve-modes") return cmd_solve_modes(p, out);
  if (name == "overlaps") return cmd_overlaps(p, out);
  if (name == "pm-map") return cmd_pm_map(p, out);
  if (name == "spectra") return cmd_spectra(p, out);
  if (name == "visibility-sweep") return cmd_visibility_sweep(p, out);
  if (name == "tomography") return cmd_tomography(p, out);
  if (name == "bell") return cmd_bell(p, out);
  throw ConfigError("command", "unknown command '" + name + "'");
}

}  // namespace spdcwg
