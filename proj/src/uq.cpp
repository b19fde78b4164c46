#include "foflux/uq.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "foflux/hash.hpp"

#include "foflux/errors.hpp"

namespace foflux {

namespace {

constexpr double kMatrixTol = 1e-12;  // symmetry / unit-diagonal slack
constexpr int kMaxStepShrinks = 60;

void check_finite(const FeatureVector& v, const char* what) {
  for (std::size_t i = 0; i < kNumFeatures; ++i)
    if (!std::isfinite(v[static_cast<Eigen::Index>(i)]))
      throw DataError(std::string(what) + " has a non-finite entry for feature '" +
                      feature_names()[i] + "'");
}

}  // namespace

InputCovariance build_covariance(const FeatureVector& center, const FeatureVector& cv,
                                 const CovMatrix& corr) {
  check_finite(center, "covariance center");
  check_finite(cv, "coefficient-of-variation vector");
  for (std::size_t i = 0; i < kNumFeatures; ++i)
    if (cv[static_cast<Eigen::Index>(i)] < 0.0)
      throw ConfigError("coefficient of variation for feature '" + feature_names()[i] +
                        "' is negative");

  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    if (!std::isfinite(corr(ii, ii)) || std::abs(corr(ii, ii) - 1.0) > kMatrixTol)
      throw ConfigError("correlation matrix diagonal for feature '" + feature_names()[i] +
                        "' is not 1");
    for (std::size_t j = 0; j < i; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      if (!std::isfinite(corr(ii, jj)) || !std::isfinite(corr(jj, ii)) ||
          std::abs(corr(ii, jj) - corr(jj, ii)) > kMatrixTol)
        throw ConfigError("correlation matrix is not symmetric between features '" +
                          feature_names()[j] + "' and '" + feature_names()[i] + "'");
      if (std::abs(corr(ii, jj)) > 1.0 + kMatrixTol)
        throw ConfigError("correlation between features '" + feature_names()[j] + "' and '" +
                          feature_names()[i] + "' lies outside [-1, 1]");
    }
  }

  Eigen::LLT<CovMatrix> llt(corr);
  if (llt.info() != Eigen::Success)
    throw ConditioningError(
        "input correlation matrix is not positive definite; sampling and propagation "
        "need a full-rank correlation");

  InputCovariance out;
  out.corr = corr;
  out.corr_chol = llt.matrixL();
  out.sigma = cv.cwiseProduct(center.cwiseAbs());
  out.cov = corr.cwiseProduct(out.sigma * out.sigma.transpose());

  // The assembled covariance must be (numerically) positive semi-definite:
  // it has to factorize with at most 1e-12 * trace of diagonal jitter. Zero
  // rows from zero sigmas are fine -- the jitter absorbs exact singularity.
  const double trace = out.cov.trace();
  if (trace > 0.0) {
    Eigen::LLT<CovMatrix> cov_llt(out.cov);
    if (cov_llt.info() != Eigen::Success) {
      const CovMatrix jittered = out.cov + 1e-12 * trace * CovMatrix::Identity();
      Eigen::LLT<CovMatrix> jittered_llt(jittered);
      if (jittered_llt.info() != Eigen::Success)
        throw ConditioningError(
            "assembled input covariance is not positive semi-definite even after "
            "1e-12 * trace of diagonal jitter");
    }
  }
  return out;
}

FeatureVector jacobian_central(const std::function<double(const FeatureVector&)>& f,
                               const FeatureVector& center, const FeatureVector& steps) {
  check_finite(center, "jacobian center");
  FeatureVector jac = FeatureVector::Zero();
  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double h = steps[ii];
    if (!(h > 0.0) || !std::isfinite(h))
      throw ConfigError("jacobian step for feature '" + feature_names()[i] +
                        "' must be positive and finite");
    FeatureVector zp = center, zm = center;
    zp[ii] += h;
    zm[ii] -= h;
    jac[ii] = (f(zp) - f(zm)) / (2.0 * h);
  }
  return jac;
}

FeatureVector hybrid_jacobian(const TrainedHybridModel& model, const OperatingPoint& point,
                              double rel_step) {
  if (!(rel_step > 0.0) || !std::isfinite(rel_step))
    throw ConfigError("jacobian relative step must be positive and finite");
  point.validate("jacobian center");

  const FeatureVector z0 = point.to_vector();
  FeatureVector jac = FeatureVector::Zero();
  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double scale = std::max(std::abs(z0[ii]), model.stats.std[ii]);
    double h = rel_step * scale;

    bool done = false;
    char failed_side = '+';
    for (int shrink = 0; shrink <= kMaxStepShrinks && !done; ++shrink) {
      FeatureVector zp = z0, zm = z0;
      zp[ii] += h;
      zm[ii] -= h;
      // A step that rounds away entirely would silently turn the central
      // difference one-sided; treat it as inadmissible instead.
      if (zp[ii] == z0[ii] || zm[ii] == z0[ii]) {
        h *= 0.5;
        continue;
      }
      const OperatingPoint pp = OperatingPoint::from_vector(zp);
      const OperatingPoint pm = OperatingPoint::from_vector(zm);
      if (!pp.is_valid()) {
        failed_side = '+';
        h *= 0.5;
        continue;
      }
      if (!pm.is_valid()) {
        failed_side = '-';
        h *= 0.5;
        continue;
      }
      try {
        failed_side = '+';
        const double fp = predict_hybrid(model, pp).jw;
        failed_side = '-';
        const double fm = predict_hybrid(model, pm).jw;
        jac[ii] = (fp - fm) / (2.0 * h);
        done = true;
      } catch (const SolverError&) {
        h *= 0.5;
      }
    }
    if (!done)
      throw SolverError("jacobian for feature '" + feature_names()[i] +
                        "' found no admissible perturbation in the " + failed_side +
                        " direction after " + std::to_string(kMaxStepShrinks) +
                        " step reductions");
  }
  return jac;
}

double delta_variance(const FeatureVector& jacobian, const InputCovariance& cov) {
  const double v = jacobian.dot(cov.cov * jacobian);
  if (!std::isfinite(v))
    throw ConditioningError("propagated input variance is not finite");
  return std::max(v, 0.0);
}

double relative_error_pct(double sigma_delta, double sigma_mc) {
  if (!(sigma_delta > 0.0) || !std::isfinite(sigma_delta))
    throw DataError("relative error needs a positive Delta-method stddev as reference");
  return 100.0 * std::abs(sigma_delta - sigma_mc) / sigma_delta;
}

PredictionWithUQ predict_with_uq(const TrainedHybridModel& model, const OperatingPoint& point,
                                 const InputCovariance& cov, double rel_step) {
  const HybridPrediction pred = predict_hybrid(model, point);
  PredictionWithUQ out;
  out.jw_hybrid = pred.jw;
  out.sigma2_model = pred.variance;
  out.jacobian = hybrid_jacobian(model, point, rel_step);
  out.sigma2_input = delta_variance(out.jacobian, cov);
  out.sigma2_total = out.sigma2_model + out.sigma2_input;
  const double half_width = kZ95 * std::sqrt(out.sigma2_total);
  out.interval95_lo = out.jw_hybrid - half_width;
  out.interval95_hi = out.jw_hybrid + half_width;
  return out;
}

PredictionWithUQ predict_with_uq(const TrainedHybridModel& model, const OperatingPoint& point,
                                 const FeatureVector& cv, const CovMatrix& corr,
                                 double rel_step) {
  const InputCovariance cov = build_covariance(point.to_vector(), cv, corr);
  return predict_with_uq(model, point, cov, rel_step);
}

McResult mc_propagate(const std::function<double(const FeatureVector&)>& f,
                      const std::function<bool(const FeatureVector&)>& admissible,
                      const FeatureVector& center, const InputCovariance& cov,
                      const McOptions& options) {
  if (options.n_samples < 2)
    throw ConfigError("Monte-Carlo sampling needs at least 2 samples, got " +
                      std::to_string(options.n_samples));
  if (!(options.oversample_cap >= 1.0))
    throw ConfigError("Monte-Carlo oversample cap must be at least 1");

  const auto max_draws = static_cast<std::size_t>(options.oversample_cap *
                                                  static_cast<double>(options.n_samples));
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<double> values;
  values.reserve(options.n_samples);
  McResult out;
  std::size_t draws = 0;
  while (values.size() < options.n_samples && draws < max_draws) {
    ++draws;
    FeatureVector u;
    for (std::size_t d = 0; d < kNumFeatures; ++d) u[static_cast<Eigen::Index>(d)] = normal(rng);
    const FeatureVector z = center + cov.sigma.asDiagonal() * (cov.corr_chol * u);
    if (!admissible(z)) {
      ++out.n_rejected;
      continue;
    }
    values.push_back(f(z));
  }
  if (values.size() < options.n_samples)
    throw DataError("Monte-Carlo sampling exhausted its draw budget: accepted " +
                    std::to_string(values.size()) + " of " + std::to_string(options.n_samples) +
                    " samples after " + std::to_string(draws) + " draws");

  const auto n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);

  out.mean = mean;
  out.stddev = std::sqrt(ss / (n - 1.0));
  out.n_used = values.size();
  return out;
}

McResult mc_validate(const TrainedHybridModel& model, const OperatingPoint& point,
                     const InputCovariance& cov, const McOptions& options) {
  point.validate("Monte-Carlo center");
  const auto f = [&model](const FeatureVector& z) {
    return predict_hybrid(model, OperatingPoint::from_vector(z)).jw;
  };

  // Count which feature sinks each rejected draw, so an exhausted budget can
  // point at the bound actually responsible.
  std::array<std::size_t, kNumFeatures> violations{};
  const auto admissible = [&violations](const FeatureVector& z) {
    const std::size_t bad = first_invalid_feature(OperatingPoint::from_vector(z));
    if (bad == kNumFeatures) return true;
    ++violations[bad];
    return false;
  };

  try {
    return mc_propagate(f, admissible, point.to_vector(), cov, options);
  } catch (const DataError& e) {
    const std::size_t worst =
        static_cast<std::size_t>(std::max_element(violations.begin(), violations.end()) -
                                 violations.begin());
    throw DataError(std::string(e.what()) + "; most rejected draws violated the bound on feature '" +
                    feature_names()[worst] + "'");
  }
}

McValidationReport mc_validate(const TrainedHybridModel& model,
                               const std::vector<OperatingPoint>& points,
                               const FeatureVector& cv, const CovMatrix& corr,
                               std::size_t n_samples, std::uint64_t seed, double rel_step) {
  if (points.empty()) throw DataError("Monte-Carlo validation needs at least one point");

  McValidationReport report;
  report.n_samples = n_samples;
  report.seed = seed;
  report.rows.reserve(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    const OperatingPoint& point = points[k];
    const InputCovariance cov = build_covariance(point.to_vector(), cv, corr);
    const PredictionWithUQ delta = predict_with_uq(model, point, cov, rel_step);

    McOptions options;
    options.n_samples = n_samples;
    options.seed = derive_seed(seed, static_cast<std::uint64_t>(k));
    const McResult mc = mc_validate(model, point, cov, options);

    McValidationRow row;
    row.point_id = k;
    row.sigma_delta = std::sqrt(delta.sigma2_input);
    row.sigma_mc = mc.stddev;
    row.relative_error_pct = relative_error_pct(row.sigma_delta, row.sigma_mc);
    row.n_rejected = mc.n_rejected;
    report.rows.push_back(row);
  }
  return report;
}

std::vector<std::size_t> validation_indices(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k > n) k = n;
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace foflux
