#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <string>

namespace foflux {

inline constexpr std::size_t kNumFeatures = 10;

using FeatureVector = Eigen::Matrix<double, kNumFeatures, 1>;
using CovMatrix = Eigen::Matrix<double, kNumFeatures, kNumFeatures>;

// Canonical feature order. All vectors/matrices indexed by feature use it.
enum Feature : std::size_t {
  kCfIn = 0,   // feed concentration, mol/L
  kCdIn = 1,   // draw concentration, mol/L
  kUfIn = 2,   // feed cross-flow velocity, m/s
  kUdIn = 3,   // draw cross-flow velocity, m/s
  kA = 4,      // water permeability coefficient, m/(Pa s)
  kEpsPsl = 5, // support-layer porosity, -
  kTau = 6,    // support-layer tortuosity, -
  kTPsl = 7,   // support-layer thickness, m
  kLx = 8,     // channel length, m
  kTc = 9,     // channel height, m
};

inline const std::array<std::string, kNumFeatures>& feature_names() {
  static const std::array<std::string, kNumFeatures> names = {
      "cf_in", "cd_in", "uf_in", "ud_in", "A", "eps_psl", "tau", "t_psl", "L_x", "t_c"};
  return names;
}

// Returns the feature index for a canonical name, or kNumFeatures if unknown.
std::size_t feature_index(const std::string& name);

/// One operating condition of the FO unit, SI units throughout
/// (concentrations in mol/L by convention).
struct OperatingPoint {
  double cf_in = 0.0;
  double cd_in = 0.0;
  double uf_in = 0.0;
  double ud_in = 0.0;
  double A = 0.0;
  double eps_psl = 0.0;
  double tau = 0.0;
  double t_psl = 0.0;
  double L_x = 0.0;
  double t_c = 0.0;

  FeatureVector to_vector() const;
  static OperatingPoint from_vector(const FeatureVector& v);

  double get(std::size_t feature) const;
  void set(std::size_t feature, double value);

  // Throws DataError if any field breaks its physical bounds
  // (fields > 0 except cf_in >= 0; eps_psl in (0,1]; tau >= 1).
  // `context` prefixes the message, e.g. "row 17".
  void validate(const std::string& context = {}) const;
  bool is_valid() const;
};

// Index of the first feature violating its physical bound, or kNumFeatures
// when the point is valid. Same rules as OperatingPoint::validate.
std::size_t first_invalid_feature(const OperatingPoint& p);

}  // namespace foflux
