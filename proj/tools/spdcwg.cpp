#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "spdcwg/commands.hpp"
#include "spdcwg/config.hpp"
#include "spdcwg/errors.hpp"
#include "spdcwg/pipeline.hpp"

namespace {

int fail(std::string_view category, const std::string& message, int code) {
  spdcwg::Json e{{"error", category}, {"message", message}};
  std::cerr << e.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multimode waveguide SPDC simulation"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out = "out";
  std::size_t threads = 1;
  std::vector<std::string> overrides;
  std::string cache_dir;
  bool rebuild = false;
  app.add_option("--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed");
  app.add_option("--out", out, "output directory");
  app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 1024));
  app.add_option("--set", overrides, "override section.key=value (repeatable)");
  app.add_option("--cache-dir", cache_dir, "mode cache directory");
  app.add_flag("--rebuild-cache", rebuild, "ignore and overwrite cached modes");

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"solve-modes", "guided-mode census and mode cache"},
      {"overlaps", "spatial overlap matrix"},
      {"pm-map", "phase-matching band maps"},
      {"spectra", "process spectra and balanced filter"},
      {"visibility-sweep", "visibility and rate against filter bandwidth"},
      {"tomography", "Wigner scan and density-matrix reconstruction"},
      {"bell", "CHSH violation map and optimum"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail("usage", e.what(), 64);
  }

  try {
    spdcwg::RunConfig cfg = config_path.empty() ? spdcwg::RunConfig{} : spdcwg::RunConfig::load(config_path);
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw spdcwg::ConfigError(o, "expected section.key=value");
      cfg.set(o.substr(0, eq), o.substr(eq + 1));
    }
    if (*seed_opt) cfg.seed = seed;
    if (!cache_dir.empty()) cfg.cache_dir = cache_dir;
    if (rebuild) cfg.rebuild_cache = true;
    cfg.validate();

    const std::string name = app.get_subcommands().front()->get_name();
    spdcwg::Pipeline p(cfg, threads);
    const spdcwg::Json summary = spdcwg::run_command(name, p, out);
    std::cout << summary.dump(2) << "\n";
  } catch (const spdcwg::Error& e) {
    return fail(spdcwg::category_name(e.category()), e.what(), spdcwg::exit_code(e.category()));
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 70);
  }
  return 0;
}
