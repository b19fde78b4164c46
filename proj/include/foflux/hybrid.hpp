#pragma once

#include <cstdint>
#include <string>

#include "foflux/dataset.hpp"
#include "foflux/gpr.hpp"
#include "foflux/physics.hpp"

namespace foflux {

/// Format tag embedded in serialized model files; bump on any layout change.
inline constexpr const char* kModelFormatVersion = "foflux-model/1";

/// Mechanistic solver plus GP residual corrector, trained as one unit.
/// The GP consumes standardized features and predicts the additive
/// correction e = jw_measured - jw_physics in m/s.
struct TrainedHybridModel {
  std::string version = kModelFormatVersion;
  PhysicsConfig physics;
  StandardizationStats stats;  // fitted on the training split only
  TrainedGP gp;
  std::uint64_t train_fingerprint = 0;  // FNV-1a over the training arrays
};

struct HybridPrediction {
  double jw = 0.0;          // corrected flux, m/s
  double jw_physics = 0.0;  // mechanistic part, m/s
  double correction = 0.0;  // GP posterior mean of the residual, m/s
  double variance = 0.0;    // GP posterior variance (model uncertainty), m^2/s^2
};

/// Order-sensitive FNV-1a fingerprint of features and measured fluxes.
std::uint64_t dataset_fingerprint(const Dataset& data);

TrainedHybridModel fit_hybrid(const Dataset& train, const PhysicsConfig& physics,
                              const GpFitOptions& gp_options);

HybridPrediction predict_hybrid(const TrainedHybridModel& model, const OperatingPoint& point);

/// JSON file with an embedded format tag and a checksum over the payload.
/// A reloaded model reproduces predictions bit-for-bit; tampered files and
/// files written by an incompatible format are rejected with a data error.
void save_model(const std::string& path, const TrainedHybridModel& model);
TrainedHybridModel load_model(const std::string& path);

}  // namespace foflux
