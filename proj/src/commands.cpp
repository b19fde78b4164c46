#include "foflux/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

#include "json.hpp"

#include "foflux/csv.hpp"
#include "foflux/errors.hpp"
#include "foflux/hash.hpp"
#include "foflux/hybrid.hpp"
#include "foflux/metrics.hpp"
#include "foflux/uq.hpp"

namespace foflux {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void ensure_out_dir(const RunConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + cfg.out_dir + "': " + ec.message());
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

json manifest_base(const RunConfig& cfg, const char* command) {
  json j;
  j["tool_version"] = kToolVersion;
  j["command"] = command;
  j["config_fnv1a64"] = to_hex(fnv1a64(cfg.to_ini_string()));
  return j;
}

void write_manifest(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open manifest for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed while writing manifest: " + path);
}

Dataset load_configured_dataset(const RunConfig& cfg) {
  if (cfg.dataset_path.empty())
    throw ConfigError("no dataset configured: set [dataset] path or pass --data");
  return load_dataset(cfg.dataset_path, cfg.schema);
}

SplitSpec split_spec(const RunConfig& cfg) {
  SplitSpec spec;
  spec.n_train = cfg.n_train;
  spec.seed = cfg.resolved_split_seed();
  spec.mode = cfg.split_mode;
  return spec;
}

TrainedHybridModel fit_from_config(const RunConfig& cfg, const Dataset& train) {
  GpFitOptions opt = cfg.gp;
  opt.seed = cfg.resolved_gp_seed();
  return fit_hybrid(train, cfg.physics, opt);
}

/// Loads the model when a path is given (verifying it was trained on this
/// split), otherwise fits in place.
TrainedHybridModel obtain_model(const RunConfig& cfg, const std::string& model_path,
                                const Dataset& train) {
  if (model_path.empty()) return fit_from_config(cfg, train);
  TrainedHybridModel model = load_model(model_path);
  const std::uint64_t expected = dataset_fingerprint(train);
  if (model.train_fingerprint != expected)
    throw DataError("model " + model_path + " was trained on different data (fingerprint " +
                    to_hex(model.train_fingerprint) + ", this training split " +
                    to_hex(expected) + "); refit or fix the split settings");
  return model;
}

json gp_summary(const TrainedGP& gp) {
  json j;
  j["signal_variance"] = gp.params.signal_variance;
  j["noise_variance"] = gp.params.noise_variance;
  json ls = json::array();
  for (std::size_t i = 0; i < kNumFeatures; ++i)
    ls.push_back(gp.params.length_scales[static_cast<Eigen::Index>(i)]);
  j["length_scales"] = ls;
  j["prior_mean"] = gp.prior_mean;
  j["jitter"] = gp.jitter_used;
  j["log_marginal_likelihood"] = gp.log_marginal_likelihood;
  return j;
}

/// Canonical evaluation subsample of the test split: uniform draw seeded from
/// the master seed alone, so [uq] seed overrides re-roll the MC noise but not
/// the points being compared.
std::vector<std::size_t> evaluation_indices(const RunConfig& cfg, std::size_t n) {
  return validation_indices(n, cfg.uq_n_points, derive_seed(cfg.seed, std::string("uq-points")));
}

struct PredictionColumns {
  std::vector<double> physics, gp, hybrid;
};

PredictionColumns predict_all(const TrainedHybridModel& model, const TrainedGP& pure_gp,
                              const Dataset& data) {
  PredictionColumns out;
  out.physics.reserve(data.size());
  out.gp.reserve(data.size());
  out.hybrid.reserve(data.size());
  for (const OperatingPoint& p : data.points) {
    const HybridPrediction pred = predict_hybrid(model, p);
    out.physics.push_back(pred.jw_physics);
    out.hybrid.push_back(pred.jw);
    out.gp.push_back(pure_gp.predict(model.stats.standardize(p.to_vector())).first);
  }
  return out;
}

void write_parity_csv(const std::string& path, const std::vector<double>& y_true,
                      const std::vector<double>& y_pred) {
  CsvTable t;
  t.header = {"row", "jw_true", "jw_pred"};
  for (std::size_t i = 0; i < y_true.size(); ++i)
    t.rows.push_back({std::to_string(i), format_full(y_true[i]), format_full(y_pred[i])});
  write_csv(path, t);
}

json metrics_to_json(const MetricsReport& m) {
  json j;
  j["n"] = m.n;
  j["rmse"] = m.rmse;
  j["mae"] = m.mae;
  if (m.r2)
    j["r2"] = *m.r2;
  else
    j["r2"] = nullptr;
  if (m.mape)
    j["mape_pct"] = *m.mape;
  else
    j["mape_pct"] = nullptr;
  return j;
}

std::string opt_cell(const std::optional<double>& v) { return v ? format_full(*v) : ""; }

}  // namespace

int cmd_generate(const RunConfig& cfg) {
  SyntheticSpec spec = cfg.synthetic;
  spec.seed = cfg.resolved_generate_seed();
  const Dataset data = generate_synthetic(spec, cfg.physics);

  ensure_out_dir(cfg);
  const std::string csv_path = out_path(cfg, "dataset.csv");
  write_dataset(csv_path, data, cfg.schema);

  json manifest = manifest_base(cfg, "generate");
  manifest["seed"] = spec.seed;
  manifest["rows"] = data.size();
  manifest["dataset_fnv1a64"] = to_hex(dataset_fingerprint(data));
  manifest["dataset_csv"] = csv_path;
  write_manifest(out_path(cfg, "generate_manifest.json"), manifest);

  std::cout << "generated " << data.size() << " rows -> " << csv_path << " (fingerprint "
            << to_hex(dataset_fingerprint(data)) << ", seed " << spec.seed << ")\n";
  return 0;
}

int cmd_fit(const RunConfig& cfg) {
  const Dataset data = load_configured_dataset(cfg);
  const auto [train, test] = split(data, split_spec(cfg));
  const TrainedHybridModel model = fit_from_config(cfg, train);

  ensure_out_dir(cfg);
  const std::string model_path = out_path(cfg, "model.json");
  save_model(model_path, model);

  CsvTable report;
  report.header = {"row", "jw_measured", "jw_physics", "residual", "gp_correction", "jw_hybrid"};
  std::vector<double> y_true, y_pred;
  double max_abs_residual = 0.0, residual_sum = 0.0, residual_ss = 0.0;
  for (std::size_t i = 0; i < train.size(); ++i) {
    const HybridPrediction pred = predict_hybrid(model, train.points[i]);
    const double measured = train.jw_measured[i];
    const double residual = measured - pred.jw_physics;
    max_abs_residual = std::max(max_abs_residual, std::abs(residual));
    residual_sum += residual;
    residual_ss += residual * residual;
    report.rows.push_back({std::to_string(i), format_full(measured),
                           format_full(pred.jw_physics), format_full(residual),
                           format_full(pred.correction), format_full(pred.jw)});
    y_true.push_back(measured);
    y_pred.push_back(pred.jw);
  }
  const std::string report_path = out_path(cfg, "fit_report.csv");
  write_csv(report_path, report);

  const auto n_train = static_cast<double>(train.size());
  const MetricsReport in_sample = compute_metrics(y_true, y_pred);
  json manifest = manifest_base(cfg, "fit");
  manifest["residuals"] = {{"max_abs", max_abs_residual},
                           {"mean", residual_sum / n_train},
                           {"rms", std::sqrt(residual_ss / n_train)}};
  manifest["dataset_csv"] = cfg.dataset_path;
  manifest["dataset_fnv1a64"] = to_hex(dataset_fingerprint(data));
  manifest["split"] = {{"mode", to_string(cfg.split_mode)},
                       {"seed", cfg.resolved_split_seed()},
                       {"n_train", train.size()},
                       {"n_test", test.size()}};
  manifest["train_fnv1a64"] = to_hex(model.train_fingerprint);
  manifest["gp"] = gp_summary(model.gp);
  manifest["in_sample"] = metrics_to_json(in_sample);
  manifest["model_json"] = model_path;
  manifest["fit_report_csv"] = report_path;
  write_manifest(out_path(cfg, "fit_manifest.json"), manifest);

  std::cout << "fitted hybrid model on " << train.size() << " rows -> " << model_path << "\n"
            << "  GP log-marginal-likelihood " << fmt(model.gp.log_marginal_likelihood)
            << ", noise stddev " << fmt(std::sqrt(model.gp.params.noise_variance)) << " m/s\n"
            << "  in-sample RMSE " << fmt(in_sample.rmse) << " m/s\n";
  return 0;
}

int cmd_predict(const RunConfig& cfg, const std::string& model_path,
                const std::string& points_path) {
  const std::string points = points_path.empty() ? cfg.predict_points_path : points_path;
  if (points.empty())
    throw ConfigError("no prediction points configured: set [predict] points or pass --points");
  const TrainedHybridModel model =
      load_model(model_path.empty() ? out_path(cfg, "model.json") : model_path);
  const Dataset input = load_points(points, cfg.schema);

  CsvTable table;
  table.header.assign(feature_names().begin(), feature_names().end());
  for (const char* extra : {"jw_pred", "jw_physics", "gp_correction", "sigma_model",
                            "sigma_input", "sigma_total", "ci95_lo", "ci95_hi"})
    table.header.push_back(extra);

  for (std::size_t i = 0; i < input.size(); ++i) {
    const OperatingPoint& p = input.points[i];
    const FeatureVector z = p.to_vector();
    const InputCovariance cov = build_covariance(z, cfg.cv, cfg.correlation);
    const HybridPrediction base = predict_hybrid(model, p);
    const PredictionWithUQ pred = predict_with_uq(model, p, cov, cfg.uq_rel_step);

    std::vector<std::string> row;
    for (std::size_t d = 0; d < kNumFeatures; ++d)
      row.push_back(format_full(z[static_cast<Eigen::Index>(d)]));
    row.push_back(format_full(pred.jw_hybrid));
    row.push_back(format_full(base.jw_physics));
    row.push_back(format_full(base.correction));
    row.push_back(format_full(std::sqrt(pred.sigma2_model)));
    row.push_back(format_full(std::sqrt(pred.sigma2_input)));
    row.push_back(format_full(std::sqrt(pred.sigma2_total)));
    row.push_back(format_full(pred.interval95_lo));
    row.push_back(format_full(pred.interval95_hi));
    table.rows.push_back(std::move(row));
  }

  ensure_out_dir(cfg);
  const std::string csv_path = out_path(cfg, "predictions.csv");
  write_csv(csv_path, table);

  json manifest = manifest_base(cfg, "predict");
  manifest["points_csv"] = points;
  manifest["rows"] = input.size();
  manifest["predictions_csv"] = csv_path;
  write_manifest(out_path(cfg, "predict_manifest.json"), manifest);

  std::cout << "predicted " << input.size() << " points -> " << csv_path << "\n";
  return 0;
}

int cmd_evaluate(const RunConfig& cfg, const std::string& model_path) {
  const Dataset data = load_configured_dataset(cfg);
  const auto [train, test] = split(data, split_spec(cfg));
  const TrainedHybridModel model = obtain_model(cfg, model_path, train);

  // Pure-GP baseline: same inputs and standardizer, but trained on the flux
  // itself with the prior pinned to the training mean.
  GpFitOptions pure_opt = cfg.gp;
  pure_opt.seed = derive_seed(cfg.resolved_gp_seed(), std::string("pure-gp"));
  pure_opt.prior_mean_from_targets = true;
  Eigen::VectorXd y_train(static_cast<Eigen::Index>(train.size()));
  for (std::size_t i = 0; i < train.size(); ++i)
    y_train[static_cast<Eigen::Index>(i)] = train.jw_measured[i];
  const TrainedGP pure_gp =
      fit_gp(model.stats.standardize_rows(train.feature_matrix()), y_train, pure_opt);

  ensure_out_dir(cfg);
  CsvTable table;
  table.header = {"model", "split", "n", "rmse", "mae", "r2", "mape_pct"};
  json manifest = manifest_base(cfg, "evaluate");
  manifest["dataset_csv"] = cfg.dataset_path;
  manifest["dataset_fnv1a64"] = to_hex(dataset_fingerprint(data));
  manifest["train_fnv1a64"] = to_hex(model.train_fingerprint);
  manifest["gp"] = gp_summary(model.gp);
  manifest["pure_gp"] = gp_summary(pure_gp);

  const struct {
    const char* name;
    const Dataset& data;
  } splits[] = {{"train", train}, {"test", test}};
  for (const auto& s : splits) {
    const PredictionColumns pred = predict_all(model, pure_gp, s.data);
    const struct {
      const char* name;
      const std::vector<double>& y;
    } models[] = {{"physics", pred.physics}, {"gp", pred.gp}, {"hybrid", pred.hybrid}};
    for (const auto& m : models) {
      const MetricsReport r = compute_metrics(s.data.jw_measured, m.y);
      table.rows.push_back({m.name, s.name, std::to_string(r.n), format_full(r.rmse),
                            format_full(r.mae), opt_cell(r.r2), opt_cell(r.mape)});
      manifest["metrics"][m.name][s.name] = metrics_to_json(r);
      write_parity_csv(
          out_path(cfg, std::string("parity_") + m.name + "_" + s.name + ".csv"),
          s.data.jw_measured, m.y);
      if (std::string(m.name) == "hybrid")
        std::cout << "hybrid " << s.name << ": RMSE " << fmt(r.rmse) << " m/s, MAE "
                  << fmt(r.mae) << " m/s, R2 " << (r.r2 ? fmt(*r.r2) : "n/a") << ", MAPE "
                  << (r.mape ? fmt(*r.mape) + "%" : "n/a") << "\n";
    }
  }

  const std::string csv_path = out_path(cfg, "evaluation.csv");
  write_csv(csv_path, table);
  manifest["evaluation_csv"] = csv_path;
  write_manifest(out_path(cfg, "evaluate_manifest.json"), manifest);

  std::cout << "evaluation table -> " << csv_path << "\n";
  return 0;
}

int cmd_validate_uq(const RunConfig& cfg, const std::string& model_path) {
  const Dataset data = load_configured_dataset(cfg);
  const auto [train, test] = split(data, split_spec(cfg));
  const TrainedHybridModel model = obtain_model(cfg, model_path, train);

  const std::vector<std::size_t> idx = evaluation_indices(cfg, test.size());
  const std::uint64_t uq_seed = cfg.resolved_uq_seed();

  std::vector<OperatingPoint> points;
  points.reserve(idx.size());
  for (std::size_t i : idx) points.push_back(test.points[i]);
  const McValidationReport report =
      mc_validate(model, points, cfg.cv, cfg.correlation, cfg.uq_n_samples, uq_seed,
                  cfg.uq_rel_step);

  CsvTable table;
  table.header = {"point", "test_row", "jw_pred", "sigma_delta", "sigma_mc",
                  "rel_err_pct", "mc_samples", "mc_rejected"};
  CsvTable scatter;
  scatter.header = {"sigma_delta", "sigma_mc"};
  std::vector<double> var_delta, var_mc, rel_err;
  for (const McValidationRow& row : report.rows) {
    const double jw = predict_hybrid(model, points[row.point_id]).jw;
    var_delta.push_back(row.sigma_delta * row.sigma_delta);
    var_mc.push_back(row.sigma_mc * row.sigma_mc);
    rel_err.push_back(row.relative_error_pct);
    table.rows.push_back({std::to_string(row.point_id), std::to_string(idx[row.point_id]),
                          format_full(jw), format_full(row.sigma_delta),
                          format_full(row.sigma_mc), format_full(row.relative_error_pct),
                          std::to_string(report.n_samples), std::to_string(row.n_rejected)});
    scatter.rows.push_back({format_full(row.sigma_delta), format_full(row.sigma_mc)});
  }

  ensure_out_dir(cfg);
  const std::string csv_path = out_path(cfg, "uq_validation.csv");
  write_csv(csv_path, table);
  const std::string scatter_path = out_path(cfg, "uq_scatter.csv");
  write_csv(scatter_path, scatter);

  const double med = median(rel_err);
  const std::optional<double> r = pearson(var_delta, var_mc);
  json manifest = manifest_base(cfg, "validate-uq");
  manifest["n_points"] = idx.size();
  manifest["n_samples"] = report.n_samples;
  manifest["seed"] = report.seed;
  manifest["median_rel_err_pct"] = med;
  manifest["pearson_r_variance"] = r ? json(*r) : json(nullptr);
  manifest["uq_validation_csv"] = csv_path;
  manifest["uq_scatter_csv"] = scatter_path;
  write_manifest(out_path(cfg, "validate_uq_manifest.json"), manifest);

  std::cout << "UQ validation over " << idx.size() << " points (" << report.n_samples
            << " samples each): median |Delta-MC| " << fmt(med) << "%, variance Pearson r "
            << (r ? fmt(*r) : "n/a") << " -> " << csv_path << "\n";
  return 0;
}

int cmd_sensitivity(const RunConfig& cfg, const std::string& model_path) {
  const Dataset data = load_configured_dataset(cfg);
  const auto [train, test] = split(data, split_spec(cfg));
  const TrainedHybridModel model = obtain_model(cfg, model_path, train);

  const std::vector<std::size_t> idx = evaluation_indices(cfg, test.size());
  std::vector<OperatingPoint> points;
  points.reserve(idx.size());
  for (std::size_t i : idx) points.push_back(test.points[i]);
  const SensitivityProfile profile = sensitivity_profile(model, points, cfg.uq_rel_step);

  ensure_out_dir(cfg);
  CsvTable table;
  table.header = {"rank", "feature", "mean_abs_djw_dz", "scaled_by_train_std"};
  for (std::size_t r = 0; r < kNumFeatures; ++r) {
    const std::size_t f = profile.ranking[r];
    table.rows.push_back(
        {std::to_string(r + 1), feature_names()[f],
         format_full(profile.mean_abs_jacobian[static_cast<Eigen::Index>(f)]),
         format_full(profile.scaled[static_cast<Eigen::Index>(f)])});
  }
  const std::string csv_path = out_path(cfg, "sensitivity.csv");
  write_csv(csv_path, table);

  json manifest = manifest_base(cfg, "sensitivity");
  manifest["n_points_used"] = profile.n_points_used;
  manifest["n_points_failed"] = profile.n_points_failed;
  manifest["sensitivity_csv"] = csv_path;
  write_manifest(out_path(cfg, "sensitivity_manifest.json"), manifest);

  std::cout << "sensitivity over " << profile.n_points_used << " points -> " << csv_path
            << "\n  top features:";
  for (std::size_t r = 0; r < 3; ++r)
    std::cout << " " << feature_names()[profile.ranking[r]];
  std::cout << "\n";
  return 0;
}

}  // namespace foflux
