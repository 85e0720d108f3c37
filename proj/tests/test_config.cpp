#include <doctest.h>

#include <fstream>

#include "arousal/config.hpp"
#include "oracles.hpp"

using namespace arousal;

TEST_CASE("defaults") {
  const PipelineConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.epoch_seconds == 30.0);
  CHECK(c.test_overlap == 0.5);
  CHECK(c.trees == 30);
  CHECK(c.features() == FeatureConfig{});
  const auto p = c.train_params();
  CHECK(p.n_trees == 30);
  CHECK(p.max_depth == 20);
  CHECK(p.min_leaf == 1);
  CHECK(PipelineConfig::keys().size() == 11);
}

TEST_CASE("set parses each key") {
  PipelineConfig c;
  c.set("trees", "12");
  c.set("seed", "18446744073709551615");
  c.set("test_overlap", " 0.25 ");
  c.set("eog_smooth_window", "31");
  c.set("xcorr_max_lag_s", "2.5");
  c.set("threads", "4");
  CHECK(c.trees == 12);
  CHECK(c.seed == 18446744073709551615ULL);
  CHECK(c.test_overlap == 0.25);
  CHECK(c.features().eog_smooth_window == 31);
  CHECK(c.features().xcorr_max_lag_s == 2.5);
  CHECK(c.train_params().n_trees == 12);
  CHECK(c.train_params().seed == c.seed);
  CHECK(c.threads == 4);
}

TEST_CASE("set rejects bad input and leaves the config unchanged") {
  PipelineConfig c;
  CHECK_THROWS_AS(c.set("bogus", "1"), ConfigError);
  CHECK_THROWS_AS(c.set("trees", "many"), ConfigError);
  CHECK_THROWS_AS(c.set("trees", "3x"), ConfigError);
  CHECK_THROWS_AS(c.set("trees", ""), ConfigError);
  CHECK_THROWS_AS(c.set("trees", "0"), ConfigError);
  CHECK_THROWS_AS(c.set("test_overlap", "1.0"), ConfigError);
  CHECK_THROWS_AS(c.set("eog_smooth_window", "50"), ConfigError);
  CHECK_THROWS_AS(c.set("epoch_seconds", "0.5"), ConfigError);
  CHECK_THROWS_AS(c.set("threads", "-1"), ConfigError);
  CHECK(c.trees == 30);
  CHECK(c.test_overlap == 0.5);
  CHECK(c.eog_smooth_window == 51);
}

TEST_CASE("merge_file") {
  testutil::TempDir tmp("cfg");
  const auto path = tmp.path() / "run.cfg";
  std::ofstream(path) << "# run settings\n\ntrees = 7\nseed=99   # trailing comment\nmin_leaf=2\n";
  PipelineConfig c;
  c.merge_file(path);
  CHECK(c.trees == 7);
  CHECK(c.seed == 99);
  CHECK(c.min_leaf == 2);

  std::ofstream(path, std::ios::trunc) << "trees=7\nnot a pair\n";
  try {
    c.merge_file(path);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
  std::ofstream(path, std::ios::trunc) << "colour=blue\n";
  CHECK_THROWS_AS(c.merge_file(path), ConfigError);
  CHECK_THROWS_AS(c.merge_file(tmp.path() / "missing.cfg"), ConfigError);
}
