#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "foflux/physics.hpp"
#include "foflux/types.hpp"

namespace foflux {

struct Provenance {
  enum class Kind { experimental, synthetic };
  Kind kind = Kind::experimental;
  std::uint64_t seed = 0;  // meaningful for synthetic only

  std::string to_string() const;
};

struct Dataset {
  std::vector<OperatingPoint> points;
  std::vector<double> jw_measured;  // m/s
  Provenance provenance;

  std::size_t size() const { return points.size(); }
  void validate() const;

  // N x 10 feature matrix in canonical order.
  Eigen::MatrixXd feature_matrix() const;
};

/// Per-feature affine transform fitted on training data only.
/// Population standard deviation (denominator N).
struct StandardizationStats {
  FeatureVector mean = FeatureVector::Zero();
  FeatureVector std = FeatureVector::Ones();

  FeatureVector standardize(const FeatureVector& x) const;
  FeatureVector destandardize(const FeatureVector& z) const;
  Eigen::MatrixXd standardize_rows(const Eigen::MatrixXd& X) const;
};

StandardizationStats fit_standardizer(const Dataset& train);

enum class SplitMode { deterministic_first_k, seeded_shuffle };

SplitMode split_mode_from_string(const std::string& s);
std::string to_string(SplitMode m);

struct SplitSpec {
  std::size_t n_train = 120;
  std::uint64_t seed = 0;
  SplitMode mode = SplitMode::seeded_shuffle;
};

// Disjoint (train, test) partition; same (spec, dataset) always gives the same split.
std::pair<Dataset, Dataset> split(const Dataset& dataset, const SplitSpec& spec);

// ---- CSV ingestion ---------------------------------------------------------

/// Maps one dataset quantity to a CSV column and declares its on-file unit.
struct ColumnSpec {
  std::string column;
  std::string unit;
};

/// Column mapping for the 10 features plus the measured flux. Defaults use
/// the canonical feature names and SI units (concentrations in M, flux m/s).
struct DatasetSchema {
  std::array<ColumnSpec, kNumFeatures> features;
  ColumnSpec jw;

  static DatasetSchema si_defaults();
};

// Conversion factor to SI for a (feature kind, unit string) pair.
// Throws ConfigError on unknown units.
double unit_to_si_factor(std::size_t feature, const std::string& unit);
double flux_unit_to_si_factor(const std::string& unit);

Dataset load_dataset(const std::string& path, const DatasetSchema& schema);
void write_dataset(const std::string& path, const Dataset& dataset, const DatasetSchema& schema);

/// Points-only variant for prediction inputs: the flux column is optional
/// (parsed when present, otherwise jw_measured is left empty).
Dataset load_points(const std::string& path, const DatasetSchema& schema);

// ---- Synthetic ground truth ------------------------------------------------

struct FeatureRange {
  double lo = 0.0;
  double hi = 0.0;
};

/// Smooth multiplicative perturbation on top of the physical flux:
/// delta(z) = amplitude * sin(freq_1 * zhat_f1) * cos(freq_2 * zhat_f2) where
/// zhat is the feature standardized by its uniform sampling distribution
/// (mean (lo+hi)/2, std (hi-lo)/sqrt(12)).
struct ResidualSpec {
  double amplitude = 0.1;  // |delta| <= amplitude, capped at 0.15
  std::size_t feature_1 = kA;
  std::size_t feature_2 = kCdIn;
  double freq_1 = 3.0;
  double freq_2 = 2.0;

  double evaluate(const FeatureVector& z, const std::array<FeatureRange, kNumFeatures>& ranges) const;
};

struct SyntheticSpec {
  std::size_t n = 2974;
  std::array<FeatureRange, kNumFeatures> ranges = default_ranges();
  ResidualSpec residual;
  double noise_cv = 0.002;  // multiplicative Gaussian measurement noise
  std::uint64_t seed = 42;

  static std::array<FeatureRange, kNumFeatures> default_ranges();
  void validate() const;
};

/// jw_measured[i] = J_physical(z_i) * (1 + delta(z_i)) * (1 + eps_i),
/// eps ~ N(0, noise_cv^2). Points are sampled uniformly inside the ranges;
/// a point the physics solver rejects is resampled (bounded retries).
Dataset generate_synthetic(const SyntheticSpec& spec, const PhysicsConfig& physics);

}  // namespace foflux
