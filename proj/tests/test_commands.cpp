#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "spdcwg/commands.hpp"
#include "spdcwg/errors.hpp"
#include "support.hpp"

using namespace spdcwg;

namespace {

RunConfig base_config() {
  RunConfig c;
  c.cache_dir = testing_support::shared_cache();
  c.seed = 123;
  return c;
}

std::string slurp(const std::filesystem::path& p) { return read_file(p); }

std::size_t data_rows(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::size_t n = 0;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    ++n;
  }
  return n;
}

}  // namespace

TEST(Commands, TomographyIsDeterministic) {
  const auto a = testing_support::scratch("cmd-tomo-a");
  const auto b = testing_support::scratch("cmd-tomo-b");
  {
    Pipeline p(base_config());
    run_command("tomography", p, a);
  }
  {
    Pipeline p(base_config());
    run_command("tomography", p, b);
  }
  for (const char* f : {"wigner_scan.csv", "wigner_scan.wig", "rho_reconstructed.csv",
                        "eigenvectors.csv", "tomography.json"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  EXPECT_NE(slurp(a / "wigner_scan.csv").find(base_config().hash()), std::string::npos);
}

TEST(Commands, NoisyTomographyNeedsSeed) {
  RunConfig c = base_config();
  c.seed.reset();
  Pipeline p(c);
  try {
    run_command("tomography", p, testing_support::scratch("cmd-noseed"));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "run.seed");
  }
  c.snr = INFINITY;
  Pipeline q(c);
  EXPECT_NO_THROW(run_command("tomography", q, testing_support::scratch("cmd-noseed-inf")));
}

TEST(Commands, SingleBandwidthSweep) {
  RunConfig c = base_config();
  c.sweep_sigma_nm = {1.5};
  Pipeline p(c);
  const auto out = testing_support::scratch("cmd-sweep");
  const Json j = run_command("visibility-sweep", p, out);
  EXPECT_EQ(j["rows"].size(), 1u);
  EXPECT_EQ(data_rows(slurp(out / "visibility_sweep.csv")), 1u);
}

TEST(Commands, UnknownCommand) {
  Pipeline p(base_config());
  EXPECT_THROW(run_command("plot", p, testing_support::scratch("cmd-unknown")), ConfigError);
}

TEST(Commands, OverlapsReport) {
  Pipeline p(base_config());
  const auto out = testing_support::scratch("cmd-overlaps");
  const Json j = run_command("overlaps", p, out);
  std::set<std::string> top = {j["strongest"][0], j["strongest"][1]};
  EXPECT_EQ(top, (std::set<std::string>{"10P-00H-10V", "10P-10H-00V"}));
  EXPECT_EQ(data_rows(slurp(out / "coupling_matrix.csv")), p.config().overlap_h.size());
  EXPECT_TRUE(std::filesystem::exists(out / "overlaps.json"));
}
