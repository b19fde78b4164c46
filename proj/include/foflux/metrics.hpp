#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "foflux/hybrid.hpp"
#include "foflux/uq.hpp"

namespace foflux {

/// Percentage rounded to one decimal place, e.g. 2.04 -> "2.0".
std::string format_pct_1dp(double pct);

/// Regression quality on one prediction set. r2 is absent when the truth is
/// constant, mape when any truth value is exactly zero.
struct MetricsReport {
  std::size_t n = 0;
  double rmse = 0.0;
  double mae = 0.0;
  std::optional<double> r2;
  std::optional<double> mape;  // percent
};

MetricsReport compute_metrics(const std::vector<double>& y_true,
                              const std::vector<double>& y_pred);

/// Sample Pearson correlation; absent when either series has zero spread.
std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y);

double median(std::vector<double> values);  // by value: selects in place

/// Mean absolute flux sensitivities over a set of points. `scaled` multiplies
/// each feature by its training stddev so magnitudes are comparable across
/// units; `ranking` lists feature indices by descending scaled sensitivity.
struct SensitivityProfile {
  FeatureVector mean_abs_jacobian = FeatureVector::Zero();  // raw units
  FeatureVector scaled = FeatureVector::Zero();             // times training stddev
  std::array<std::size_t, kNumFeatures> ranking{};
  std::size_t n_points_used = 0;
  std::size_t n_points_failed = 0;  // jacobian solve failures, skipped
};

SensitivityProfile sensitivity_profile(const TrainedHybridModel& model,
                                       const std::vector<OperatingPoint>& points,
                                       double rel_step = kDefaultJacobianRelStep);

/// Fractions of the total variance carried by each component.
struct UncertaintyShares {
  double share_model = 0.0;
  double share_input = 0.0;
};

UncertaintyShares decomposition_profile(const PredictionWithUQ& prediction);

}  // namespace foflux
