#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>

#include "foflux/types.hpp"

namespace foflux {

/// Matern 5/2 hyperparameters with ARD (one length scale per feature).
struct KernelParams {
  double signal_variance = 1.0;                     // sigma_f^2, target units^2
  FeatureVector length_scales = FeatureVector::Ones();  // standardized-feature units
  double noise_variance = 1e-6;                     // sigma_n^2, target units^2

  void validate() const;
};

/// k(x, x') = sigma_f^2 * (1 + sqrt(5) r + (5/3) r^2) * exp(-sqrt(5) r),
/// r^2 = sum_d ((x_d - x'_d) / ell_d)^2.
double matern52(const FeatureVector& x, const FeatureVector& x2, const KernelParams& params);

struct GpFitOptions {
  int restarts = 8;
  std::uint64_t seed = 0;
  int max_evaluations = 4000;  // per restart
  // Bounds in log space; signal/noise variances are relative to the target variance.
  double log_ell_lo = -3.0, log_ell_hi = 4.0;
  double log_sf2_lo = -12.0, log_sf2_hi = 4.0;
  double log_sn2_lo = -16.0, log_sn2_hi = 0.0;
  double prior_mean = 0.0;
  bool prior_mean_from_targets = false;  // overrides prior_mean with mean(y)
};

/// Frozen exact-GP state: factorized once at fit time, immutable afterwards.
struct TrainedGP {
  Eigen::MatrixXd Z_train;      // N x 10, standardized inputs
  Eigen::VectorXd targets;      // N
  KernelParams params;
  Eigen::MatrixXd chol_factor;  // lower-triangular L, L L^T = K + sigma_n^2 I + jitter I
  Eigen::VectorXd alpha;        // (K + sigma_n^2 I)^-1 (targets - prior_mean)
  double prior_mean = 0.0;
  double jitter_used = 0.0;
  double log_marginal_likelihood = 0.0;

  std::pair<double, double> predict(const FeatureVector& z_star) const;  // (mean, variance)
};

/// Builds the frozen state for given hyperparameters (no optimization).
TrainedGP build_gp(const Eigen::MatrixXd& Z, const Eigen::VectorXd& targets,
                   const KernelParams& params, double prior_mean = 0.0);

/// Marginal log-likelihood maximization over log-parameters by Nelder-Mead
/// with seeded random restarts. Deterministic given (data, options).
TrainedGP fit_gp(const Eigen::MatrixXd& Z, const Eigen::VectorXd& targets,
                 const GpFitOptions& options);

/// log p(y | Z, params): -1/2 y~^T K^-1 y~ - 1/2 log|K| - N/2 log(2 pi), K = K + sigma_n^2 I.
double log_marginal_likelihood(const Eigen::MatrixXd& Z, const Eigen::VectorXd& targets,
                               const KernelParams& params, double prior_mean = 0.0);

std::pair<double, double> predict_gp(const TrainedGP& model, const FeatureVector& z_star);

}  // namespace foflux
