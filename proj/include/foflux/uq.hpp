#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "foflux/hybrid.hpp"
#include "foflux/types.hpp"

namespace foflux {

inline constexpr double kDefaultJacobianRelStep = 1e-4;
inline constexpr double kZ95 = 1.96;  // two-sided 95% normal quantile

/// Input-noise description: per-feature standard deviations derived from
/// coefficients of variation, plus a cross-feature correlation matrix.
struct InputCovariance {
  FeatureVector sigma = FeatureVector::Zero();  // per-feature stddev, raw units
  CovMatrix corr = CovMatrix::Identity();
  CovMatrix cov = CovMatrix::Zero();            // corr .* (sigma sigma^T)
  CovMatrix corr_chol = CovMatrix::Identity();  // lower factor of corr, drives sampling
};

/// sigma_i = cv_i * |center_i|. Rejects asymmetric, non-unit-diagonal and
/// non-positive-definite correlation matrices up front, and checks that the
/// assembled covariance factorizes with at most 1e-12 * trace of jitter.
InputCovariance build_covariance(const FeatureVector& center, const FeatureVector& cv,
                                 const CovMatrix& corr);

/// Plain central differences J_i = (f(z + h_i e_i) - f(z - h_i e_i)) / (2 h_i);
/// exact for affine f up to round-off. No validity handling -- the caller
/// chooses steps that keep both evaluations admissible.
FeatureVector jacobian_central(const std::function<double(const FeatureVector&)>& f,
                               const FeatureVector& center, const FeatureVector& steps);

/// Central-difference sensitivity of the corrected flux, h_i scaled by
/// max(|z_i|, training stddev of feature i). Steps shrink until both sides
/// pass validation and solve; a side that never becomes admissible raises a
/// solver error naming the feature and direction.
FeatureVector hybrid_jacobian(const TrainedHybridModel& model, const OperatingPoint& point,
                              double rel_step = kDefaultJacobianRelStep);

/// First-order propagated variance J^T cov J, clamped at zero.
double delta_variance(const FeatureVector& jacobian, const InputCovariance& cov);

/// 100 * |sigma_delta - sigma_mc| / sigma_delta; the Delta value is the
/// reference, so it must be positive.
double relative_error_pct(double sigma_delta, double sigma_mc);

struct PredictionWithUQ {
  double jw_hybrid = 0.0;     // m/s
  double sigma2_model = 0.0;  // GP posterior variance, m^2/s^2
  double sigma2_input = 0.0;  // propagated input-noise variance, m^2/s^2
  double sigma2_total = 0.0;  // sum of the two components
  FeatureVector jacobian = FeatureVector::Zero();  // d jw / d z_i, raw units
  double interval95_lo = 0.0;  // jw -/+ 1.96 sqrt(sigma2_total)
  double interval95_hi = 0.0;
};

PredictionWithUQ predict_with_uq(const TrainedHybridModel& model, const OperatingPoint& point,
                                 const InputCovariance& cov,
                                 double rel_step = kDefaultJacobianRelStep);

/// Convenience overload: builds the covariance at the point itself
/// (sigma_i = cv_i * |z_i|) before propagating.
PredictionWithUQ predict_with_uq(const TrainedHybridModel& model, const OperatingPoint& point,
                                 const FeatureVector& cv, const CovMatrix& corr,
                                 double rel_step = kDefaultJacobianRelStep);

struct McOptions {
  std::size_t n_samples = 1000;
  std::uint64_t seed = 0;
  double oversample_cap = 10.0;  // give up after cap * n_samples total draws
};

struct McResult {
  double mean = 0.0;
  double stddev = 0.0;       // sample stddev, n - 1 denominator
  std::size_t n_used = 0;
  std::size_t n_rejected = 0;  // draws discarded as inadmissible
};

/// Draws z = center + diag(sigma) * corr_chol * u with u ~ N(0, I), skips
/// draws the admissibility predicate rejects, and reports the sample spread
/// of f. Deterministic for a fixed seed.
McResult mc_propagate(const std::function<double(const FeatureVector&)>& f,
                      const std::function<bool(const FeatureVector&)>& admissible,
                      const FeatureVector& center, const InputCovariance& cov,
                      const McOptions& options);

/// Monte-Carlo reference for the Delta estimate at a single point.
McResult mc_validate(const TrainedHybridModel& model, const OperatingPoint& point,
                     const InputCovariance& cov, const McOptions& options);

struct McValidationRow {
  std::size_t point_id = 0;
  double sigma_delta = 0.0;  // Delta-method input stddev, m/s
  double sigma_mc = 0.0;     // Monte-Carlo sample stddev, m/s
  double relative_error_pct = 0.0;
  std::size_t n_rejected = 0;
};

struct McValidationReport {
  std::vector<McValidationRow> rows;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
};

/// Runs the Delta/MC comparison over a batch of points. Each point samples
/// from its own generator seeded by (seed, point_id), so the report does not
/// depend on evaluation order and single points can be reproduced in
/// isolation.
McValidationReport mc_validate(const TrainedHybridModel& model,
                               const std::vector<OperatingPoint>& points,
                               const FeatureVector& cv, const CovMatrix& corr,
                               std::size_t n_samples, std::uint64_t seed,
                               double rel_step = kDefaultJacobianRelStep);

/// Seeded uniform subsample of k indices out of [0, n), returned sorted.
/// Canonical way to pick evaluation points out of a test split; the seed is
/// independent of the splits and of the MC sampling seed.
std::vector<std::size_t> validation_indices(std::size_t n, std::size_t k, std::uint64_t seed);

}  // namespace foflux
