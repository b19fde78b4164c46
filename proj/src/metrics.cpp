#include "foflux/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>

#include "foflux/errors.hpp"

namespace foflux {

std::string format_pct_1dp(double pct) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", pct);
  return buf;
}

MetricsReport compute_metrics(const std::vector<double>& y_true,
                              const std::vector<double>& y_pred) {
  if (y_true.empty()) throw DataError("metrics need at least one sample");
  if (y_true.size() != y_pred.size())
    throw DataError("metrics input lengths differ: " + std::to_string(y_true.size()) + " vs " +
                    std::to_string(y_pred.size()));

  const auto n = static_cast<double>(y_true.size());
  double ss_err = 0.0, abs_err = 0.0;
  bool any_zero_truth = false;
  double ape = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const double e = y_pred[i] - y_true[i];
    ss_err += e * e;
    abs_err += std::abs(e);
    if (y_true[i] == 0.0)
      any_zero_truth = true;
    else
      ape += std::abs(e / y_true[i]);
  }

  MetricsReport out;
  out.n = y_true.size();
  out.rmse = std::sqrt(ss_err / n);
  out.mae = abs_err / n;
  if (!any_zero_truth) out.mape = 100.0 * ape / n;

  const double mean_truth = std::accumulate(y_true.begin(), y_true.end(), 0.0) / n;
  double ss_tot = 0.0;
  for (double y : y_true) ss_tot += (y - mean_truth) * (y - mean_truth);
  if (ss_tot > 0.0) out.r2 = 1.0 - ss_err / ss_tot;
  return out;
}

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size())
    throw DataError("correlation input lengths differ: " + std::to_string(x.size()) + " vs " +
                    std::to_string(y.size()));
  if (x.size() < 2) throw DataError("correlation needs at least two samples");

  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

double median(std::vector<double> values) {
  if (values.empty()) throw DataError("median of an empty set is undefined");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid),
                   values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower =
      *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

SensitivityProfile sensitivity_profile(const TrainedHybridModel& model,
                                       const std::vector<OperatingPoint>& points,
                                       double rel_step) {
  if (points.empty()) throw DataError("sensitivity profile needs at least one point");

  SensitivityProfile out;
  for (const OperatingPoint& p : points) {
    FeatureVector jac;
    try {
      jac = hybrid_jacobian(model, p, rel_step);
    } catch (const SolverError&) {
      ++out.n_points_failed;
      continue;
    }
    out.mean_abs_jacobian += jac.cwiseAbs();
    ++out.n_points_used;
  }
  if (out.n_points_used == 0)
    throw DataError("sensitivity profile failed: the jacobian solve succeeded at none of " +
                    std::to_string(points.size()) + " points");

  out.mean_abs_jacobian /= static_cast<double>(out.n_points_used);
  out.scaled = out.mean_abs_jacobian.cwiseProduct(model.stats.std);

  std::iota(out.ranking.begin(), out.ranking.end(), std::size_t{0});
  std::stable_sort(out.ranking.begin(), out.ranking.end(), [&out](std::size_t a, std::size_t b) {
    return out.scaled[static_cast<Eigen::Index>(a)] > out.scaled[static_cast<Eigen::Index>(b)];
  });
  return out;
}

UncertaintyShares decomposition_profile(const PredictionWithUQ& prediction) {
  if (prediction.sigma2_total <= 0.0)
    throw DataError("uncertainty decomposition is undefined: total variance is zero");
  UncertaintyShares out;
  out.share_model = prediction.sigma2_model / prediction.sigma2_total;
  out.share_input = prediction.sigma2_input / prediction.sigma2_total;
  return out;
}

}  // namespace foflux
