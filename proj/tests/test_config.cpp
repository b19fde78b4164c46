#include "doctest.h"

#include <string>

#include "foflux/config.hpp"
#include "foflux/errors.hpp"
#include "foflux/hash.hpp"
#include "test_util.hpp"

using namespace foflux;

namespace {

RunConfig parse(const std::string& text) { return parse_config(text, "test.ini"); }

}  // namespace

TEST_SUITE("config") {

TEST_CASE("an empty file yields the documented defaults") {
  const RunConfig cfg = parse("");
  CHECK(cfg.out_dir == "out");
  CHECK(cfg.seed == 42);
  CHECK(cfg.n_train == 120);
  CHECK(cfg.split_mode == SplitMode::seeded_shuffle);
  CHECK(cfg.synthetic.n == 2974);
  CHECK(cfg.physics.B == 1e-7);
  CHECK(cfg.gp.restarts == 8);
  CHECK(cfg.cv == default_cv());
  CHECK(cfg.correlation == CovMatrix::Identity());
  CHECK(cfg.uq_n_samples == 1000);
  CHECK(cfg.uq_n_points == 20);
}

TEST_CASE("the canonical form is a fixed point of parsing") {
  RunConfig cfg = parse(
      "[run]\n"
      "seed = 7\n"
      "[dataset]\n"
      "path = data/runs.csv\n"
      "[physics]\n"
      "B = 2e-7\n"
      "[correlation]\n"
      "eps_psl:tau = 0.25\n");
  const std::string first = cfg.to_ini_string();
  const RunConfig reparsed = parse(first);
  const std::string second = reparsed.to_ini_string();
  CHECK(first == second);
}

TEST_CASE("values land in their typed fields") {
  const RunConfig cfg = parse(
      "[run]\n"
      "out_dir = scratch/run1\n"
      "seed = 9001\n"
      "[dataset]\n"
      "path = d.csv\n"
      "n_train = 30\n"
      "split_mode = deterministic-first-k\n"
      "split_seed = 5\n"
      "[ranges]\n"
      "cd_in = 0.9:1.4\n"
      "[generate]\n"
      "n = 50\n"
      "noise_cv = 0.004\n"
      "delta_feature_1 = tau\n"
      "[physics]\n"
      "sherwood = laminar-leveque\n"
      "k_override = 1.5e-5\n"
      "[gp]\n"
      "restarts = 3\n"
      "max_evaluations = 500\n"
      "[cv]\n"
      "A = 0.07\n"
      "[correlation]\n"
      "t_psl:tau = -0.4\n"
      "[uq]\n"
      "n_samples = 250\n"
      "n_points = 5\n"
      "[predict]\n"
      "points = probes.csv\n");

  CHECK(cfg.out_dir == "scratch/run1");
  CHECK(cfg.seed == 9001);
  CHECK(cfg.dataset_path == "d.csv");
  CHECK(cfg.n_train == 30);
  CHECK(cfg.split_mode == SplitMode::deterministic_first_k);
  REQUIRE(cfg.split_seed.has_value());
  CHECK(*cfg.split_seed == 5);
  CHECK(cfg.synthetic.ranges[kCdIn].lo == 0.9);
  CHECK(cfg.synthetic.ranges[kCdIn].hi == 1.4);
  CHECK(cfg.synthetic.n == 50);
  CHECK(cfg.synthetic.noise_cv == 0.004);
  CHECK(cfg.synthetic.residual.feature_1 == kTau);
  CHECK(cfg.physics.sherwood == SherwoodMode::laminar_leveque);
  REQUIRE(cfg.physics.k_override.has_value());
  CHECK(*cfg.physics.k_override == 1.5e-5);
  CHECK(cfg.gp.restarts == 3);
  CHECK(cfg.gp.max_evaluations == 500);
  CHECK(cfg.cv[kA] == 0.07);
  CHECK(cfg.cv[kCfIn] == default_cv()[kCfIn]);
  CHECK(cfg.correlation(kTPsl, kTau) == -0.4);
  CHECK(cfg.correlation(kTau, kTPsl) == -0.4);
  CHECK(cfg.uq_n_samples == 250);
  CHECK(cfg.uq_n_points == 5);
  CHECK(cfg.predict_points_path == "probes.csv");
}

TEST_CASE("comments and blank lines are invisible") {
  const RunConfig cfg = parse(
      "# leading comment\n"
      "\n"
      "[run]\n"
      "; another comment style\n"
      "seed = 13\n");
  CHECK(cfg.seed == 13);
}

TEST_CASE("unknown structure is reported with origin and line") {
  CHECK_THROWS_WITH_AS(parse("[run]\nseed = 5\nbogus = 1\n"),
                       doctest::Contains("test.ini:3"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("[run]\nseed = 5\nbogus = 1\n"),
                       doctest::Contains("unknown key 'bogus'"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("[warp]\nspeed = 9\n"), doctest::Contains("unknown section [warp]"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse("[run]\nseed = 1\nseed = 2\n"),
                       doctest::Contains("duplicate key 'seed'"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("seed = 1\n"), doctest::Contains("before any [section]"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse("[run\nseed = 1\n"), doctest::Contains("malformed section header"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse("[run]\nseed\n"), doctest::Contains("expected 'key = value'"),
                       ConfigError);
}

TEST_CASE("k_override accepts a value or the word none") {
  CHECK_FALSE(parse("[physics]\nk_override = none\n").physics.k_override.has_value());
  CHECK(*parse("[physics]\nk_override = 2e-5\n").physics.k_override == 2e-5);
  CHECK_THROWS_WITH_AS(parse("[physics]\nk_override = 0\n"),
                       doctest::Contains("must be > 0 or 'none'"), ConfigError);
}

TEST_CASE("correlation keys are validated pairwise") {
  CHECK_THROWS_WITH_AS(parse("[correlation]\ntau:tau = 0.5\n"),
                       doctest::Contains("cannot correlate with itself"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("[correlation]\ntau:t_psl = 0.5\nt_psl:tau = 0.5\n"),
                       doctest::Contains("already given"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("[correlation]\ntau:t_psl = 1.5\n"),
                       doctest::Contains("[-1, 1]"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("[correlation]\nwombat:tau = 0.5\n"),
                       doctest::Contains("unknown feature 'wombat'"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("[correlation]\ntau = 0.5\n"),
                       doctest::Contains("expected 'feature:feature'"), ConfigError);
}

TEST_CASE("ranges must be ordered intervals") {
  CHECK_THROWS_WITH_AS(parse("[ranges]\ncd_in = 1.4:0.9\n"), doctest::Contains("lo < hi"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse("[ranges]\ncd_in = 1.4\n"), doctest::Contains("expected 'lo:hi'"),
                       ConfigError);
}

TEST_CASE("schema entries carry column and unit") {
  const RunConfig cfg = parse("[schema]\ncf_in = feed_conc:mM\njw = flux:LMH\n");
  CHECK(cfg.schema.features[kCfIn].column == "feed_conc");
  CHECK(cfg.schema.features[kCfIn].unit == "mM");
  CHECK(cfg.schema.jw.column == "flux");
  CHECK(cfg.schema.jw.unit == "LMH");
  CHECK_THROWS_WITH_AS(parse("[schema]\ncf_in = feed_conc\n"),
                       doctest::Contains("expected 'column:unit'"), ConfigError);
}

TEST_CASE("malformed numbers never pass silently") {
  CHECK_THROWS_WITH_AS(parse("[physics]\nB = squishy\n"),
                       doctest::Contains("not a finite number"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("[physics]\nB = 1e999\n"),
                       doctest::Contains("not a finite number"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("[run]\nseed = +5\n"),
                       doctest::Contains("not a non-negative integer"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("[run]\nseed = -5\n"),
                       doctest::Contains("not a non-negative integer"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("[cv]\nA = -0.1\n"), doctest::Contains("must be >= 0"),
                       ConfigError);
}

TEST_CASE("structural minimums are enforced") {
  CHECK_THROWS_WITH_AS(parse("[dataset]\nn_train = 1\n"), doctest::Contains("at least 2"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse("[generate]\nn = 1\n"), doctest::Contains("at least 2"),
                       ConfigError);
  CHECK_THROWS_AS(parse("[gp]\nrestarts = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse("[gp]\nmax_evaluations = 5\n"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("[generate]\ndelta_amplitude = 0.2\n"),
                       doctest::Contains("amplitude"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("[dataset]\nsplit_mode = alphabetical\n"),
                       doctest::Contains("unknown split mode"), ConfigError);
}

TEST_CASE("sub-seeds derive from the master seed until pinned") {
  const RunConfig cfg = parse("[run]\nseed = 100\n");
  CHECK(cfg.resolved_split_seed() == derive_seed(100, std::string("split")));
  CHECK(cfg.resolved_generate_seed() == derive_seed(100, std::string("generate")));
  CHECK(cfg.resolved_gp_seed() == derive_seed(100, std::string("gp")));
  CHECK(cfg.resolved_uq_seed() == derive_seed(100, std::string("uq")));
  CHECK(cfg.resolved_split_seed() != cfg.resolved_generate_seed());

  const RunConfig pinned = parse("[run]\nseed = 100\n[dataset]\nsplit_seed = 7\n");
  CHECK(pinned.resolved_split_seed() == 7);
  CHECK(pinned.resolved_gp_seed() == cfg.resolved_gp_seed());
}

TEST_CASE("loading a config from disk") {
  const std::string path = scratch_path("load_config.ini");
  write_text_file(path, "[run]\nseed = 77\n");
  CHECK(load_config(path).seed == 77);
  CHECK_THROWS_AS(load_config(scratch_path("missing_config.ini")), IoError);
}

}  // TEST_SUITE
