#include <cmath>
#include <cstdlib>
#include <fstream>

#include <gtest/gtest.h>

#include "spdcwg/config.hpp"
#include "spdcwg/errors.hpp"
#include "spdcwg/io.hpp"
#include "spdcwg/mode_cache.hpp"
#include "support.hpp"

using namespace spdcwg;

TEST(Container, RoundTrip) {
  const auto dir = testing_support::scratch("container");
  const std::vector<double> data = {1.0, -0.5, 1e-300, std::nan(""), 3.25};
  write_container(dir / "a.bin", Json{{"shape", {5}}}, data);
  const Container c = read_container(dir / "a.bin");
  EXPECT_EQ(c.header["shape"][0], 5);
  ASSERT_EQ(c.payload.size(), 5u);
  EXPECT_EQ(c.payload[2], 1e-300);
  EXPECT_TRUE(std::isnan(c.payload[3]));
}

TEST(Container, VersionMismatchAsksForRebuild) {
  const auto dir = testing_support::scratch("container-version");
  write_container(dir / "a.bin", Json::object(), std::vector<double>{1.0});
  std::string bytes = read_file(dir / "a.bin");
  bytes[8] = static_cast<char>(container_version + 1);
  write_file_atomic(dir / "a.bin", bytes);
  try {
    read_container(dir / "a.bin");
    FAIL();
  } catch (const CacheError& e) {
    EXPECT_NE(std::string(e.what()).find("--rebuild-cache"), std::string::npos);
  }
  write_file_atomic(dir / "b.bin", "not a container");
  EXPECT_THROW(read_container(dir / "b.bin"), IoError);
  EXPECT_THROW(read_container(dir / "missing.bin"), IoError);
}

TEST(Csv, HeaderCommentsAndShortestNumbers) {
  CsvTable t({"a", "b"});
  t.comment("hello");
  t.row({0.1, 1e-20});
  t.row("x", std::vector<double>{2.5});
  t.text_row({"p", "q"});
  EXPECT_EQ(t.rows(), 3u);
  EXPECT_EQ(t.str(), "# hello\na,b\n0.1,1e-20\nx,2.5\np,q\n");
  EXPECT_THROW(t.row({1.0}), ContractError);
  for (double x : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-310}) {
    EXPECT_EQ(std::strtod(format_number(x).c_str(), nullptr), x);
  }
}

TEST(Hash, Fnv1a) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(hex64(fnv1a("a")), "af63dc4c8601ec8c");
}

TEST(Config, LoadAndOverride) {
  const auto dir = testing_support::scratch("config");
  std::ofstream(dir / "run.ini") << "[waveguide]\nwidth = 5.5\n[process]\npoling_period = 8.1\n"
                                   "pump_mode = 10\n[filter]\nsigma_nm = none\n[sweep]\n"
                                   "sigma_nm = 0.5, 1.0\n[tomography]\nsnr = inf\n[run]\nseed = 17\n";
  RunConfig c = RunConfig::load(dir / "run.ini");
  EXPECT_EQ(c.profile.width, 5.5);
  ASSERT_TRUE(c.poling_period);
  EXPECT_EQ(*c.poling_period, 8.1);
  EXPECT_FALSE(c.filter_sigma_nm);
  EXPECT_EQ(c.sweep_sigma_nm, (std::vector<double>{0.5, 1.0}));
  EXPECT_TRUE(std::isinf(c.snr));
  EXPECT_EQ(c.seed, 17u);
  c.set("process.poling_period", "auto");
  EXPECT_FALSE(c.poling_period);
  c.set("overlaps.h_modes", "00, 10");
  EXPECT_EQ(c.overlap_h.size(), 2u);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, FieldLevelErrors) {
  RunConfig c;
  auto field_of = [&](auto fn) {
    try {
      fn();
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(field_of([&] { c.set("process.nonsense", "1"); }), "process.nonsense");
  EXPECT_EQ(field_of([&] { c.set("process.length_mm", "abc"); }), "process.length_mm");
  RunConfig bad;
  bad.length_mm = -1.0;
  EXPECT_EQ(field_of([&] { bad.validate(); }), "process.length_mm");
  bad = RunConfig{};
  bad.tomo_weights = std::pair{0.5, 0.6};
  EXPECT_EQ(field_of([&] { bad.validate(); }), "tomography.weights");
  const auto dir = testing_support::scratch("config-bad");
  std::ofstream(dir / "bad.ini") << "[grid]\nspacing = 0.1\n";
  EXPECT_THROW(RunConfig::load(dir / "bad.ini"), ConfigError);
}

TEST(Config, HashTracksSemanticFieldsOnly) {
  const RunConfig base;
  RunConfig c = base;
  c.cache_dir = "/somewhere/else";
  c.rebuild_cache = true;
  EXPECT_EQ(c.hash(), base.hash());
  for (const auto& [key, value] :
       std::vector<std::pair<std::string, std::string>>{{"waveguide.depth", "9.5"},
                                                        {"grid.ny", "183"},
                                                        {"process.length_mm", "2"},
                                                        {"filter.sigma_nm", "1.0"},
                                                        {"tomography.snr", "10"},
                                                        {"run.seed", "5"},
                                                        {"bell.zeta_max", "2.5"}}) {
    RunConfig d = base;
    d.set(key, value);
    EXPECT_NE(d.hash(), base.hash()) << key;
  }
  RunConfig e = base;
  e.set("process.length_mm", "1.0");
  EXPECT_EQ(e.hash(), base.hash());
}

TEST(ModeCacheTest, StoresAndReuses) {
  const auto dir = testing_support::scratch("mode-cache");
  Grid2D g;
  g.ny = 61;
  g.nz = 201;
  {
    ModeCache cache(dir, Substrate{}, g, ProfileParams{});
    const auto a = cache.modes(Axis::y, 0.8, 3);
    EXPECT_EQ(cache.misses(), 1u);
    const auto b = cache.modes(Axis::y, 0.8, 2);
    EXPECT_EQ(cache.hits(), 1u);
    ASSERT_EQ(b.size(), 2u);
    EXPECT_EQ(b[1].n_eff, a[1].n_eff);
    EXPECT_EQ((b[1].field - a[1].field).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(b[1].label, a[1].label);
    EXPECT_TRUE(std::filesystem::exists(cache.path_for(Axis::y, 0.8)));
    EXPECT_NE(cache.key(Axis::y, 0.8), cache.key(Axis::z, 0.8));
    EXPECT_NE(cache.key(Axis::y, 0.8), cache.key(Axis::y, 0.81));
  }
  ModeCache again(dir, Substrate{}, g, ProfileParams{});
  again.modes(Axis::y, 0.8, 3);
  EXPECT_EQ(again.hits(), 1u);
  again.modes(Axis::y, 0.8, 4);
  EXPECT_EQ(again.misses(), 1u);
  ModeCache rebuild(dir, Substrate{}, g, ProfileParams{}, true);
  rebuild.modes(Axis::y, 0.8, 2);
  EXPECT_EQ(rebuild.misses(), 1u);
  Grid2D other = g;
  other.nz = 203;
  EXPECT_NE(ModeCache(dir, Substrate{}, other, ProfileParams{}).key(Axis::y, 0.8),
            again.key(Axis::y, 0.8));
}

TEST(Config, ShippedFileMatchesBuiltInDefaults) {
  const RunConfig c = RunConfig::load(std::filesystem::path(SPDCWG_SOURCE_DIR) / "config/default.ini");
  RunConfig d;
  d.seed = 1;
  EXPECT_EQ(c.hash(), d.hash());
  EXPECT_NO_THROW(c.validate());
}
