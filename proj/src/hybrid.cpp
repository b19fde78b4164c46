#include "foflux/hybrid.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "json.hpp"

#include "foflux/errors.hpp"
#include "foflux/hash.hpp"

namespace foflux {

using nlohmann::json;

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index jcol = 0; jcol < m.cols(); ++jcol) row.push_back(m(i, jcol));
    rows.push_back(row);
  }
  return rows;
}

Eigen::VectorXd vector_from_json(const json& a, const char* what) {
  if (!a.is_array()) throw DataError(std::string("model field '") + what + "' is not an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

FeatureVector feature_vector_from_json(const json& a, const char* what) {
  const Eigen::VectorXd v = vector_from_json(a, what);
  if (v.size() != static_cast<Eigen::Index>(kNumFeatures))
    throw DataError(std::string("model field '") + what + "' has " + std::to_string(v.size()) +
                    " entries, expected " + std::to_string(kNumFeatures));
  return FeatureVector(v);
}

Eigen::MatrixXd matrix_from_json(const json& a, const char* what) {
  if (!a.is_array() || a.empty())
    throw DataError(std::string("model field '") + what + "' is not a non-empty array of rows");
  const std::size_t cols = a[0].size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_array() || a[i].size() != cols)
      throw DataError(std::string("model field '") + what + "' has ragged rows");
    for (std::size_t jcol = 0; jcol < cols; ++jcol)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(jcol)) = a[i][jcol].get<double>();
  }
  return m;
}

json physics_to_json(const PhysicsConfig& cfg) {
  json j;
  j["B"] = cfg.B;
  j["T"] = cfg.T;
  j["vant_hoff_i"] = cfg.vant_hoff_i;
  j["D_s_ref"] = cfg.D_s_ref;
  j["rho_ref"] = cfg.rho_ref;
  j["mu_ref"] = cfg.mu_ref;
  j["density_poly"] = cfg.property_correlations.density;
  j["viscosity_poly"] = cfg.property_correlations.viscosity;
  j["diffusivity_poly"] = cfg.property_correlations.diffusivity;
  j["osmotic_pressure_poly"] = cfg.property_correlations.osmotic_pressure;
  j["sherwood"] = to_string(cfg.sherwood);
  if (cfg.k_override)
    j["k_override"] = *cfg.k_override;
  else
    j["k_override"] = nullptr;
  j["solver_tol"] = cfg.solver_tol;
  j["solver_max_iter"] = cfg.solver_max_iter;
  return j;
}

PhysicsConfig physics_from_json(const json& j) {
  PhysicsConfig cfg;
  cfg.B = j.at("B").get<double>();
  cfg.T = j.at("T").get<double>();
  cfg.vant_hoff_i = j.at("vant_hoff_i").get<double>();
  cfg.D_s_ref = j.at("D_s_ref").get<double>();
  cfg.rho_ref = j.at("rho_ref").get<double>();
  cfg.mu_ref = j.at("mu_ref").get<double>();
  cfg.property_correlations.density = j.at("density_poly").get<std::vector<double>>();
  cfg.property_correlations.viscosity = j.at("viscosity_poly").get<std::vector<double>>();
  cfg.property_correlations.diffusivity = j.at("diffusivity_poly").get<std::vector<double>>();
  cfg.property_correlations.osmotic_pressure =
      j.at("osmotic_pressure_poly").get<std::vector<double>>();
  cfg.sherwood = sherwood_mode_from_string(j.at("sherwood").get<std::string>());
  if (!j.at("k_override").is_null()) cfg.k_override = j.at("k_override").get<double>();
  cfg.solver_tol = j.at("solver_tol").get<double>();
  cfg.solver_max_iter = j.at("solver_max_iter").get<int>();
  return cfg;
}

// Payload serialization is the checksum domain: nlohmann keeps object keys
// sorted, and its double formatting round-trips exactly, so dump() of the
// same model is byte-stable across save/load cycles.
json payload_to_json(const TrainedHybridModel& model) {
  json j;
  j["physics"] = physics_to_json(model.physics);
  j["standardizer"]["mean"] = vector_to_json(model.stats.mean);
  j["standardizer"]["std"] = vector_to_json(model.stats.std);
  j["gp"]["signal_variance"] = model.gp.params.signal_variance;
  j["gp"]["length_scales"] = vector_to_json(model.gp.params.length_scales);
  j["gp"]["noise_variance"] = model.gp.params.noise_variance;
  j["gp"]["prior_mean"] = model.gp.prior_mean;
  j["gp"]["Z_train"] = matrix_to_json(model.gp.Z_train);
  j["gp"]["targets"] = vector_to_json(model.gp.targets);
  j["train_fingerprint"] = to_hex(model.train_fingerprint);
  return j;
}

std::uint64_t hex_to_u64(const std::string& s, const char* what) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 16);
  if (s.empty() || end != s.c_str() + s.size())
    throw DataError(std::string("model field '") + what + "' is not a hex value: '" + s + "'");
  return static_cast<std::uint64_t>(v);
}

}  // namespace

std::uint64_t dataset_fingerprint(const Dataset& data) {
  std::uint64_t h = fnv1a64("foflux-dataset");
  h = fnv1a64_append(h, static_cast<double>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    const FeatureVector z = data.points[i].to_vector();
    for (std::size_t d = 0; d < kNumFeatures; ++d) h = fnv1a64_append(h, z[static_cast<Eigen::Index>(d)]);
    h = fnv1a64_append(h, data.jw_measured[i]);
  }
  return h;
}

TrainedHybridModel fit_hybrid(const Dataset& train, const PhysicsConfig& physics,
                              const GpFitOptions& gp_options) {
  train.validate();
  physics.validate();
  if (train.size() < 2)
    throw DataError("hybrid fit needs at least 2 training points, got " +
                    std::to_string(train.size()));

  TrainedHybridModel model;
  model.physics = physics;
  model.stats = fit_standardizer(train);

  Eigen::VectorXd residuals(static_cast<Eigen::Index>(train.size()));
  for (std::size_t i = 0; i < train.size(); ++i) {
    PhysicalFluxBreakdown phys;
    try {
      phys = solve_physical_flux(train.points[i], physics);
    } catch (const Error& e) {
      throw SolverError("physics solve failed on training row " + std::to_string(i) + ": " +
                        e.what());
    }
    residuals[static_cast<Eigen::Index>(i)] = train.jw_measured[i] - phys.jw;
  }

  model.gp = fit_gp(model.stats.standardize_rows(train.feature_matrix()), residuals, gp_options);
  model.train_fingerprint = dataset_fingerprint(train);
  return model;
}

HybridPrediction predict_hybrid(const TrainedHybridModel& model, const OperatingPoint& point) {
  const PhysicalFluxBreakdown phys = solve_physical_flux(point, model.physics);
  const auto [mean, variance] = model.gp.predict(model.stats.standardize(point.to_vector()));
  HybridPrediction out;
  out.jw_physics = phys.jw;
  out.correction = mean;
  out.jw = phys.jw + mean;
  out.variance = variance;
  return out;
}

void save_model(const std::string& path, const TrainedHybridModel& model) {
  const json payload = payload_to_json(model);
  json file;
  file["format"] = model.version;
  file["checksum"] = to_hex(fnv1a64(payload.dump()));
  file["payload"] = payload;

  std::ofstream out(path);
  if (!out) throw IoError("cannot open model file for writing: " + path);
  out << file.dump(2) << '\n';
  if (!out) throw IoError("failed while writing model file: " + path);
}

TrainedHybridModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file: " + path);

  json file;
  try {
    in >> file;
  } catch (const json::parse_error& e) {
    throw DataError("model file " + path + " is not valid JSON: " + e.what());
  }

  try {
    const std::string format = file.at("format").get<std::string>();
    if (format != kModelFormatVersion)
      throw DataError("model file " + path + " has format '" + format +
                      "' but this build reads '" + kModelFormatVersion + "'");

    const json& payload = file.at("payload");
    const std::string stored = file.at("checksum").get<std::string>();
    const std::string recomputed = to_hex(fnv1a64(payload.dump()));
    if (stored != recomputed)
      throw DataError("model file " + path + " failed its checksum (stored " + stored +
                      ", recomputed " + recomputed + "): file is corrupted");

    TrainedHybridModel model;
    model.version = format;
    model.physics = physics_from_json(payload.at("physics"));
    model.physics.validate();
    model.stats.mean = feature_vector_from_json(payload.at("standardizer").at("mean"), "standardizer.mean");
    model.stats.std = feature_vector_from_json(payload.at("standardizer").at("std"), "standardizer.std");

    KernelParams params;
    params.signal_variance = payload.at("gp").at("signal_variance").get<double>();
    params.length_scales = feature_vector_from_json(payload.at("gp").at("length_scales"), "gp.length_scales");
    params.noise_variance = payload.at("gp").at("noise_variance").get<double>();
    const double prior_mean = payload.at("gp").at("prior_mean").get<double>();
    const Eigen::MatrixXd Z = matrix_from_json(payload.at("gp").at("Z_train"), "gp.Z_train");
    const Eigen::VectorXd targets = vector_from_json(payload.at("gp").at("targets"), "gp.targets");
    if (Z.cols() != static_cast<Eigen::Index>(kNumFeatures))
      throw DataError("model field 'gp.Z_train' has " + std::to_string(Z.cols()) +
                      " columns, expected " + std::to_string(kNumFeatures));
    if (Z.rows() != targets.size())
      throw DataError("model fields 'gp.Z_train' and 'gp.targets' disagree on the number of rows");

    // Refactorizing from identical inputs is deterministic, so the reloaded
    // model predicts bit-for-bit what the saved one did.
    model.gp = build_gp(Z, targets, params, prior_mean);
    model.train_fingerprint =
        hex_to_u64(payload.at("train_fingerprint").get<std::string>(), "train_fingerprint");
    return model;
  } catch (const json::exception& e) {
    throw DataError("model file " + path + " is missing or mistypes a field: " + e.what());
  }
}

}  // namespace foflux
