#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "foflux/dataset.hpp"
#include "foflux/errors.hpp"
#include "foflux/hybrid.hpp"
#include "test_util.hpp"

using namespace foflux;

namespace {

const char* kValidRow = "0.02,1.2,0.12,0.14,1.1e-12,0.5,1.6,9e-5,0.1,2e-3";

std::string header_line() {
  std::string h;
  for (std::size_t i = 0; i < kNumFeatures; ++i) h += feature_names()[i] + ",";
  return h + "jw";
}

// Two distinct valid rows so no feature column is constant.
Dataset tiny_dataset() {
  const std::string path = scratch_path("tiny_dataset.csv");
  write_text_file(path, header_line() + "\n" + kValidRow + ",3e-6\n" +
                            "0.01,0.9,0.10,0.12,9e-13,0.45,1.4,7e-5,0.09,1.8e-3,2e-6\n");
  return load_dataset(path, DatasetSchema::si_defaults());
}

SyntheticSpec small_spec(std::size_t n = 24) {
  SyntheticSpec spec;
  spec.n = n;
  spec.seed = 99;
  return spec;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("ingestion converts declared units to SI") {
  DatasetSchema schema = DatasetSchema::si_defaults();
  schema.jw.unit = "LMH";
  const std::string path = scratch_path("dataset_lmh.csv");
  write_text_file(path, header_line() + "\n" + kValidRow + ",36.0\n");

  const Dataset data = load_dataset(path, schema);
  REQUIRE(data.size() == 1);
  CHECK(data.jw_measured[0] == doctest::Approx(1.0e-5).epsilon(1e-15));
  CHECK(data.points[0].cd_in == 1.2);
}

TEST_CASE("missing column is named in the error") {
  const std::string path = scratch_path("dataset_missing_col.csv");
  write_text_file(path, "cf_in,jw\n0.02,3e-6\n");
  CHECK_THROWS_WITH_AS(load_dataset(path, DatasetSchema::si_defaults()),
                       doctest::Contains("cd_in"), DataError);
}

TEST_CASE("non-numeric cell reports its row") {
  const std::string path = scratch_path("dataset_bad_cell.csv");
  write_text_file(path, header_line() + "\n" + kValidRow + ",not_a_number\n");
  CHECK_THROWS_WITH_AS(load_dataset(path, DatasetSchema::si_defaults()),
                       doctest::Contains("row"), DataError);
}

TEST_CASE("out-of-bounds porosity fails validation") {
  const std::string path = scratch_path("dataset_bad_eps.csv");
  write_text_file(path, header_line() + "\n" +
                            "0.02,1.2,0.12,0.14,1.1e-12,1.2,1.6,9e-5,0.1,2e-3,3e-6\n");
  CHECK_THROWS_WITH_AS(load_dataset(path, DatasetSchema::si_defaults()),
                       doctest::Contains("eps_psl"), DataError);
}

TEST_CASE("unknown units are rejected up front") {
  CHECK_THROWS_AS(flux_unit_to_si_factor("furlongs"), ConfigError);
  CHECK_THROWS_AS(unit_to_si_factor(kCfIn, "oz"), ConfigError);
}

TEST_CASE("write then load reproduces the dataset") {
  const PhysicsConfig physics;
  const Dataset data = generate_synthetic(small_spec(), physics);
  const std::string path = scratch_path("dataset_roundtrip.csv");
  const DatasetSchema schema = DatasetSchema::si_defaults();
  write_dataset(path, data, schema);

  const Dataset back = load_dataset(path, schema);
  REQUIRE(back.size() == data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(back.jw_measured[i] == data.jw_measured[i]);  // 17-digit output is exact
    for (std::size_t f = 0; f < kNumFeatures; ++f)
      CHECK(back.points[i].get(f) == data.points[i].get(f));
  }
}

TEST_CASE("points files may omit the flux column") {
  const std::string path = scratch_path("points_no_flux.csv");
  std::string h;
  for (std::size_t i = 0; i < kNumFeatures; ++i) h += (i ? "," : "") + feature_names()[i];
  write_text_file(path, h + "\n" + kValidRow + "\n");
  const Dataset pts = load_points(path, DatasetSchema::si_defaults());
  REQUIRE(pts.size() == 1);
  CHECK(pts.jw_measured.empty());
  // The same file is rejected by the full loader.
  CHECK_THROWS_AS(load_dataset(path, DatasetSchema::si_defaults()), DataError);
}

TEST_CASE("first-k split is literal and seeded splits partition") {
  const Dataset data = generate_synthetic(small_spec(12), PhysicsConfig{});

  SplitSpec spec;
  spec.mode = SplitMode::deterministic_first_k;
  spec.n_train = 2;
  const auto [train_fk, test_fk] = split(data, spec);
  CHECK(train_fk.size() == 2);
  CHECK(test_fk.size() == 10);
  CHECK(train_fk.jw_measured[0] == data.jw_measured[0]);
  CHECK(train_fk.jw_measured[1] == data.jw_measured[1]);
  CHECK(test_fk.jw_measured[0] == data.jw_measured[2]);

  spec.mode = SplitMode::seeded_shuffle;
  spec.seed = 5;
  spec.n_train = 5;
  const auto [train_a, test_a] = split(data, spec);
  const auto [train_b, test_b] = split(data, spec);
  CHECK(dataset_fingerprint(train_a) == dataset_fingerprint(train_b));
  CHECK(dataset_fingerprint(test_a) == dataset_fingerprint(test_b));

  // Union of the halves is a permutation of the input.
  std::vector<double> all = train_a.jw_measured;
  all.insert(all.end(), test_a.jw_measured.begin(), test_a.jw_measured.end());
  std::vector<double> orig = data.jw_measured;
  std::sort(all.begin(), all.end());
  std::sort(orig.begin(), orig.end());
  CHECK(all == orig);

  // A different seed shuffles differently.
  spec.seed = 6;
  const auto [train_c, test_c] = split(data, spec);
  CHECK(dataset_fingerprint(train_c) != dataset_fingerprint(train_a));
}

TEST_CASE("oversized training request is a config error") {
  const Dataset data = generate_synthetic(small_spec(6), PhysicsConfig{});
  SplitSpec spec;
  spec.n_train = 6;
  CHECK_THROWS_AS(split(data, spec), ConfigError);
}

TEST_CASE("standardizer uses population statistics") {
  const Dataset data = tiny_dataset();
  const StandardizationStats stats = fit_standardizer(data);
  // Column cf_in holds {0.02, 0.01}: mean 0.015, population std 0.005.
  CHECK(stats.mean[kCfIn] == doctest::Approx(0.015).epsilon(1e-12));
  CHECK(stats.std[kCfIn] == doctest::Approx(0.005).epsilon(1e-12));

  // Standardized training columns have mean 0 and std 1.
  const Eigen::MatrixXd Z = stats.standardize_rows(data.feature_matrix());
  for (Eigen::Index c = 0; c < Z.cols(); ++c) {
    CHECK(std::abs(Z.col(c).mean()) <= 1e-12);
    const double var = Z.col(c).squaredNorm() / static_cast<double>(Z.rows()) -
                       Z.col(c).mean() * Z.col(c).mean();
    CHECK(std::sqrt(var) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("standardize and destandardize are inverse") {
  const Dataset data = generate_synthetic(small_spec(16), PhysicsConfig{});
  const StandardizationStats stats = fit_standardizer(data);
  for (const OperatingPoint& p : data.points) {
    const FeatureVector x = p.to_vector();
    const FeatureVector back = stats.destandardize(stats.standardize(x));
    for (Eigen::Index i = 0; i < back.size(); ++i)
      CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-12));
  }
}

TEST_CASE("constant feature column is rejected by name") {
  Dataset data = generate_synthetic(small_spec(8), PhysicsConfig{});
  for (OperatingPoint& p : data.points) p.tau = 1.5;
  CHECK_THROWS_WITH_AS(fit_standardizer(data), doctest::Contains("tau"), DataError);
}

TEST_CASE("noise-free generation reproduces the physics exactly") {
  SyntheticSpec spec = small_spec(10);
  spec.noise_cv = 0.0;
  spec.residual.amplitude = 0.0;
  const PhysicsConfig physics;
  const Dataset data = generate_synthetic(spec, physics);
  for (std::size_t i = 0; i < data.size(); ++i)
    CHECK(data.jw_measured[i] == solve_physical_flux(data.points[i], physics).jw);
}

TEST_CASE("generation is seed-deterministic") {
  const PhysicsConfig physics;
  const Dataset a = generate_synthetic(small_spec(), physics);
  const Dataset b = generate_synthetic(small_spec(), physics);
  CHECK(dataset_fingerprint(a) == dataset_fingerprint(b));
  CHECK(a.provenance.kind == Provenance::Kind::synthetic);
  CHECK(a.provenance.seed == 99);

  SyntheticSpec other = small_spec();
  other.seed = 100;
  CHECK(dataset_fingerprint(generate_synthetic(other, physics)) != dataset_fingerprint(a));
}

TEST_CASE("perturbation stays within its amplitude") {
  const SyntheticSpec spec = small_spec();
  const PhysicsConfig physics;
  const Dataset data = generate_synthetic(spec, physics);
  for (const OperatingPoint& p : data.points) {
    const double delta = spec.residual.evaluate(p.to_vector(), spec.ranges);
    CHECK(std::abs(delta) <= spec.residual.amplitude + 1e-15);
  }
}

TEST_CASE("excessive perturbation amplitude is rejected") {
  SyntheticSpec spec = small_spec();
  spec.residual.amplitude = 0.2;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("split mode strings round trip") {
  CHECK(split_mode_from_string("seeded-shuffle") == SplitMode::seeded_shuffle);
  CHECK(split_mode_from_string("deterministic-first-k") == SplitMode::deterministic_first_k);
  CHECK(to_string(SplitMode::seeded_shuffle) == "seeded-shuffle");
  CHECK_THROWS_AS(split_mode_from_string("sorted"), ConfigError);
}

}  // TEST_SUITE
