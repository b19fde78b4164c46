#include "doctest.h"

#include <cmath>
#include <string>

#include "json.hpp"

#include "foflux/errors.hpp"
#include "foflux/hash.hpp"
#include "foflux/hybrid.hpp"
#include "test_util.hpp"

using namespace foflux;

namespace {

Dataset small_data(std::size_t n, std::uint64_t seed, double noise_cv = 0.01,
                   double amplitude = 0.1) {
  SyntheticSpec spec;
  spec.n = n;
  spec.seed = seed;
  spec.noise_cv = noise_cv;
  spec.residual.amplitude = amplitude;
  return generate_synthetic(spec, PhysicsConfig{});
}

GpFitOptions fast_fit() {
  GpFitOptions opt;
  opt.restarts = 1;
  opt.seed = 5;
  opt.max_evaluations = 400;
  return opt;
}

const TrainedHybridModel& fitted_model() {
  static const TrainedHybridModel model =
      fit_hybrid(small_data(14, 77), PhysicsConfig{}, fast_fit());
  return model;
}

const Dataset& probe_points() {
  static const Dataset probes = small_data(10, 123);
  return probes;
}

// Round-trips the saved file through nlohmann so tests can corrupt one field
// surgically while keeping the rest of the file intact.
nlohmann::json read_model_json(const std::string& path) {
  return nlohmann::json::parse(read_text_file(path));
}

void write_model_json(const std::string& path, const nlohmann::json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace

TEST_SUITE("hybrid") {

TEST_CASE("prediction decomposes into physics plus correction") {
  const TrainedHybridModel& model = fitted_model();
  for (const OperatingPoint& p : probe_points().points) {
    const HybridPrediction pred = predict_hybrid(model, p);
    CHECK(pred.jw_physics > 0.0);
    CHECK(pred.variance >= 0.0);
    CHECK(std::abs((pred.jw - pred.jw_physics) - pred.correction) <=
          1e-15 * std::max({std::abs(pred.jw), std::abs(pred.jw_physics), 1e-300}));
  }
}

TEST_CASE("zero residuals train a silent corrector") {
  const Dataset clean = small_data(10, 31, /*noise_cv=*/0.0, /*amplitude=*/0.0);
  const TrainedHybridModel model = fit_hybrid(clean, PhysicsConfig{}, fast_fit());
  for (const OperatingPoint& p : probe_points().points) {
    const HybridPrediction pred = predict_hybrid(model, p);
    CHECK(pred.correction == 0.0);
    CHECK(pred.jw == pred.jw_physics);
  }
}

TEST_CASE("save and load reproduce predictions bit for bit") {
  const TrainedHybridModel& model = fitted_model();
  const std::string path = scratch_path("roundtrip_model.json");
  save_model(path, model);
  const TrainedHybridModel loaded = load_model(path);

  CHECK(loaded.version == std::string(kModelFormatVersion));
  CHECK(loaded.train_fingerprint == model.train_fingerprint);
  CHECK(loaded.stats.mean == model.stats.mean);
  CHECK(loaded.stats.std == model.stats.std);

  for (const OperatingPoint& p : probe_points().points) {
    const HybridPrediction a = predict_hybrid(model, p);
    const HybridPrediction b = predict_hybrid(loaded, p);
    CHECK(a.jw == b.jw);
    CHECK(a.jw_physics == b.jw_physics);
    CHECK(a.correction == b.correction);
    CHECK(a.variance == b.variance);
  }
}

TEST_CASE("saving twice yields identical bytes") {
  const TrainedHybridModel& model = fitted_model();
  const std::string p1 = scratch_path("model_a.json");
  const std::string p2 = scratch_path("model_b.json");
  save_model(p1, model);
  save_model(p2, model);
  CHECK(read_text_file(p1) == read_text_file(p2));
}

TEST_CASE("loading a missing file is an io error") {
  CHECK_THROWS_AS(load_model(scratch_path("no_such_model.json")), IoError);
}

TEST_CASE("loading malformed json is a data error") {
  const std::string path = scratch_path("malformed_model.json");
  write_text_file(path, "{ this is not json");
  CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("not valid JSON"), DataError);
}

TEST_CASE("a truncated file is rejected") {
  const std::string good = scratch_path("full_model.json");
  save_model(good, fitted_model());
  const std::string text = read_text_file(good);
  const std::string path = scratch_path("truncated_model.json");
  write_text_file(path, text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(load_model(path), DataError);
}

TEST_CASE("an unknown format tag names both versions") {
  const std::string path = scratch_path("wrong_format_model.json");
  save_model(path, fitted_model());
  nlohmann::json file = read_model_json(path);
  file["format"] = "foflux-model/99";
  write_model_json(path, file);
  CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("foflux-model/99"), DataError);
  try {
    load_model(path);
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find(kModelFormatVersion) != std::string::npos);
  }
}

TEST_CASE("a tampered payload fails its checksum") {
  const std::string path = scratch_path("tampered_model.json");
  save_model(path, fitted_model());
  nlohmann::json file = read_model_json(path);
  const double sf2 = file["payload"]["gp"]["signal_variance"].get<double>();
  file["payload"]["gp"]["signal_variance"] = sf2 * (1.0 + 1e-9);
  write_model_json(path, file);
  CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("checksum"), DataError);
}

TEST_CASE("a structurally valid file with a missing field is rejected") {
  const std::string path = scratch_path("missing_field_model.json");
  save_model(path, fitted_model());
  nlohmann::json file = read_model_json(path);
  file["payload"]["gp"].erase("targets");
  file["checksum"] = to_hex(fnv1a64(file["payload"].dump()));  // keep the checksum honest
  write_model_json(path, file);
  CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("missing or mistypes"), DataError);
}

TEST_CASE("dataset fingerprints are order-sensitive") {
  Dataset a = small_data(6, 9);
  Dataset b = a;
  CHECK(dataset_fingerprint(a) == dataset_fingerprint(b));
  std::swap(b.points[1], b.points[4]);
  std::swap(b.jw_measured[1], b.jw_measured[4]);
  CHECK(dataset_fingerprint(a) != dataset_fingerprint(b));
  Dataset c = a;
  c.jw_measured[2] = std::nextafter(c.jw_measured[2], 1.0);
  CHECK(dataset_fingerprint(a) != dataset_fingerprint(c));
}

TEST_CASE("fitting needs at least two training points") {
  Dataset tiny = small_data(4, 50);
  tiny.points.resize(1);
  tiny.jw_measured.resize(1);
  CHECK_THROWS_WITH_AS(fit_hybrid(tiny, PhysicsConfig{}, fast_fit()),
                       doctest::Contains("at least 2"), DataError);
}

TEST_CASE("an invalid training row is reported by index") {
  Dataset bad = small_data(5, 51);
  bad.points[3].eps_psl = 1.5;
  CHECK_THROWS_WITH_AS(fit_hybrid(bad, PhysicsConfig{}, fast_fit()),
                       doctest::Contains("row 3"), DataError);
}

TEST_CASE("a physics failure during training names the row") {
  PhysicsConfig starved;
  starved.solver_max_iter = 1;
  CHECK_THROWS_WITH_AS(fit_hybrid(small_data(5, 52), starved, fast_fit()),
                       doctest::Contains("training row"), SolverError);
}

}  // TEST_SUITE
