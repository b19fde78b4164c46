#include "foflux/gpr.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "foflux/errors.hpp"
#include "foflux/hash.hpp"
#include "foflux/nelder_mead.hpp"

namespace foflux {

namespace {

const double kSqrt5 = std::sqrt(5.0);

double matern52_r(double r, double sf2) {
  return sf2 * (1.0 + kSqrt5 * r + (5.0 / 3.0) * r * r) * std::exp(-kSqrt5 * r);
}

double scaled_distance(const FeatureVector& x, const FeatureVector& x2,
                       const FeatureVector& ell) {
  double r2 = 0.0;
  for (Eigen::Index d = 0; d < x.size(); ++d) {
    const double t = (x(d) - x2(d)) / ell(d);
    r2 += t * t;
  }
  return std::sqrt(r2);
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& Z, const KernelParams& p) {
  const Eigen::Index n = Z.rows();
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = p.signal_variance;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double r = scaled_distance(Z.row(i).transpose(), Z.row(j).transpose(), p.length_scales);
      K(i, j) = K(j, i) = matern52_r(r, p.signal_variance);
    }
  }
  return K;
}

// Cholesky of K + sigma_n^2 I, escalating the jitter ladder on failure.
// Returns (L, jitter). Throws ConditioningError when the ladder is exhausted.
std::pair<Eigen::MatrixXd, double> cholesky_with_jitter(const Eigen::MatrixXd& K,
                                                        double noise_variance) {
  const double mean_diag = K.diagonal().mean() + noise_variance;
  Eigen::MatrixXd A = K;
  A.diagonal().array() += noise_variance;

  double jitter = 0.0;
  for (int step = 0; step <= 4; ++step) {
    Eigen::MatrixXd B = A;
    if (jitter > 0.0) B.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(B);
    if (llt.info() == Eigen::Success) return {llt.matrixL(), jitter};
    jitter = (step == 0) ? 1e-12 * mean_diag : jitter * 100.0;
    jitter = std::min(jitter, 1e-6 * mean_diag);
  }
  std::ostringstream os;
  os << "gpr: Cholesky failed with jitter up to " << 1e-6 * mean_diag
     << " (mean diagonal " << mean_diag << ")";
  throw ConditioningError(os.str());
}

struct LogParamSpace {
  double scale;  // target variance, sets the unit for sigma_f^2 and sigma_n^2
  Eigen::VectorXd lo, hi;

  LogParamSpace(double target_variance, const GpFitOptions& opt)
      : scale(target_variance > 0.0 ? target_variance : 1.0),
        lo(kNumFeatures + 2), hi(kNumFeatures + 2) {
    lo(0) = opt.log_sf2_lo; hi(0) = opt.log_sf2_hi;
    for (std::size_t d = 0; d < kNumFeatures; ++d) {
      lo(static_cast<Eigen::Index>(d) + 1) = opt.log_ell_lo;
      hi(static_cast<Eigen::Index>(d) + 1) = opt.log_ell_hi;
    }
    lo(kNumFeatures + 1) = opt.log_sn2_lo; hi(kNumFeatures + 1) = opt.log_sn2_hi;
  }

  KernelParams to_params(const Eigen::VectorXd& theta) const {
    KernelParams p;
    p.signal_variance = scale * std::exp(theta(0));
    for (std::size_t d = 0; d < kNumFeatures; ++d)
      p.length_scales(static_cast<Eigen::Index>(d)) = std::exp(theta(static_cast<Eigen::Index>(d) + 1));
    p.noise_variance = scale * std::exp(theta(kNumFeatures + 1));
    return p;
  }

  Eigen::VectorXd clamp(const Eigen::VectorXd& theta) const {
    return theta.cwiseMax(lo).cwiseMin(hi);
  }
};

double negative_mll(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y_centered,
                    const KernelParams& p) {
  const Eigen::MatrixXd K = kernel_matrix(Z, p);
  auto [L, jitter] = cholesky_with_jitter(K, p.noise_variance);
  (void)jitter;
  const Eigen::VectorXd alpha =
      L.transpose().triangularView<Eigen::Upper>().solve(
          L.triangularView<Eigen::Lower>().solve(y_centered));
  const double n = static_cast<double>(Z.rows());
  return 0.5 * y_centered.dot(alpha) + L.diagonal().array().log().sum() +
         0.5 * n * std::log(2.0 * std::numbers::pi);
}

}  // namespace

void KernelParams::validate() const {
  if (!(signal_variance > 0.0)) throw DataError("gpr: signal_variance must be positive");
  if (!(noise_variance > 0.0)) throw DataError("gpr: noise_variance must be positive");
  if (!(length_scales.array() > 0.0).all())
    throw DataError("gpr: length scales must be positive");
}

double matern52(const FeatureVector& x, const FeatureVector& x2, const KernelParams& params) {
  return matern52_r(scaled_distance(x, x2, params.length_scales), params.signal_variance);
}

TrainedGP build_gp(const Eigen::MatrixXd& Z, const Eigen::VectorXd& targets,
                   const KernelParams& params, double prior_mean) {
  if (Z.rows() != targets.size()) throw DataError("gpr: Z and targets lengths differ");
  if (Z.rows() < 1) throw DataError("gpr: empty training set");
  if (Z.cols() != static_cast<Eigen::Index>(kNumFeatures))
    throw DataError("gpr: Z must have 10 columns");
  params.validate();

  TrainedGP m;
  m.Z_train = Z;
  m.targets = targets;
  m.params = params;
  m.prior_mean = prior_mean;

  const Eigen::MatrixXd K = kernel_matrix(Z, params);
  auto [L, jitter] = cholesky_with_jitter(K, params.noise_variance);
  m.chol_factor = L;
  m.jitter_used = jitter;

  const Eigen::VectorXd y = targets.array() - prior_mean;
  m.alpha = L.transpose().triangularView<Eigen::Upper>().solve(
      L.triangularView<Eigen::Lower>().solve(y));
  const double n = static_cast<double>(Z.rows());
  m.log_marginal_likelihood = -(0.5 * y.dot(m.alpha) + L.diagonal().array().log().sum() +
                                0.5 * n * std::log(2.0 * std::numbers::pi));
  return m;
}

double log_marginal_likelihood(const Eigen::MatrixXd& Z, const Eigen::VectorXd& targets,
                               const KernelParams& params, double prior_mean) {
  const Eigen::VectorXd y = targets.array() - prior_mean;
  return -negative_mll(Z, y, params);
}

TrainedGP fit_gp(const Eigen::MatrixXd& Z, const Eigen::VectorXd& targets,
                 const GpFitOptions& options) {
  if (Z.rows() != targets.size()) throw DataError("fit_gp: Z and targets lengths differ");
  if (Z.rows() < 2) throw DataError("fit_gp: need at least 2 rows");
  if (options.restarts < 1) throw ConfigError("fit_gp: restarts must be >= 1");

  const double prior_mean =
      options.prior_mean_from_targets ? targets.mean() : options.prior_mean;
  const Eigen::VectorXd y = targets.array() - prior_mean;
  const double target_variance = y.squaredNorm() / static_cast<double>(y.size());
  const LogParamSpace space(target_variance, options);

  auto objective = [&](const Eigen::VectorXd& theta) {
    const Eigen::VectorXd clamped = space.clamp(theta);
    double penalty = 1e3 * (theta - clamped).squaredNorm();
    try {
      return negative_mll(Z, y, space.to_params(clamped)) + penalty;
    } catch (const ConditioningError&) {
      return 1e300;  // reject this region, keep searching
    }
  };

  // Restart 0 from a standard init; the rest sample the box uniformly.
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Eigen::VectorXd best_theta;
  double best_nll = std::numeric_limits<double>::infinity();
  bool any_converged = false;

  for (int restart = 0; restart < options.restarts; ++restart) {
    Eigen::VectorXd theta0(kNumFeatures + 2);
    if (restart == 0) {
      theta0.setZero();
      theta0(0) = 0.0;                       // sigma_f^2 = target variance
      theta0(kNumFeatures + 1) = std::log(1e-2);  // sigma_n^2 = 1% of it
    } else {
      for (Eigen::Index i = 0; i < theta0.size(); ++i)
        theta0(i) = space.lo(i) + (space.hi(i) - space.lo(i)) * unit(rng);
    }
    theta0 = space.clamp(theta0);

    NelderMeadOptions nm;
    nm.max_evaluations = options.max_evaluations;
    const NelderMeadResult res = nelder_mead(objective, theta0, nm);
    if (res.f < best_nll) {
      best_nll = res.f;
      best_theta = space.clamp(res.x);
    }
    any_converged = any_converged || res.f < 1e299;
  }
  if (!any_converged || !best_theta.size())
    throw SolverError("fit_gp: every restart diverged");

  return build_gp(Z, targets, space.to_params(best_theta), prior_mean);
}

std::pair<double, double> TrainedGP::predict(const FeatureVector& z_star) const {
  if (!z_star.allFinite()) throw DataError("predict_gp: query point is not finite");

  const Eigen::Index n = Z_train.rows();
  Eigen::VectorXd k_star(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = scaled_distance(z_star, Z_train.row(i).transpose(), params.length_scales);
    k_star(i) = matern52_r(r, params.signal_variance);
  }

  const double mean = prior_mean + k_star.dot(alpha);
  const Eigen::VectorXd v = chol_factor.triangularView<Eigen::Lower>().solve(k_star);
  double variance = params.signal_variance - v.squaredNorm();
  if (variance < 0.0) {
    if (variance < -1e-12 * params.signal_variance) {
      std::ostringstream os;
      os << "predict_gp: posterior variance " << variance << " below round-off budget";
      throw ConditioningError(os.str());
    }
    variance = 0.0;
  }
  return {mean, variance};
}

std::pair<double, double> predict_gp(const TrainedGP& model, const FeatureVector& z_star) {
  return model.predict(z_star);
}

}  // namespace foflux
