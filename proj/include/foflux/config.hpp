#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "foflux/dataset.hpp"
#include "foflux/gpr.hpp"
#include "foflux/physics.hpp"
#include "foflux/types.hpp"

namespace foflux {

/// Default per-feature coefficients of variation for input-noise propagation:
/// 2% concentrations, 5% velocities and permeability, 10% support-layer
/// structure, 1% channel geometry.
FeatureVector default_cv();

/// Everything a run needs, merged from defaults and an INI file; command-line
/// flags override individual fields after loading. Sub-seeds left unset in
/// the file are derived deterministically from [run] seed.
struct RunConfig {
  // [run]
  std::string out_dir = "out";
  std::uint64_t seed = 42;

  // [dataset]
  std::string dataset_path;
  std::size_t n_train = 120;
  SplitMode split_mode = SplitMode::seeded_shuffle;
  std::optional<std::uint64_t> split_seed;

  // [schema]
  DatasetSchema schema = DatasetSchema::si_defaults();

  // [generate] + [ranges]
  SyntheticSpec synthetic;
  std::optional<std::uint64_t> generate_seed;

  // [physics]
  PhysicsConfig physics;

  // [gp]
  GpFitOptions gp;
  std::optional<std::uint64_t> gp_seed;

  // [cv] and [correlation]
  FeatureVector cv = default_cv();
  CovMatrix correlation = CovMatrix::Identity();

  // [uq]
  std::size_t uq_n_samples = 1000;
  std::size_t uq_n_points = 20;
  double uq_rel_step = 1e-4;
  std::optional<std::uint64_t> uq_seed;

  // [predict]
  std::string predict_points_path;

  std::uint64_t resolved_split_seed() const;
  std::uint64_t resolved_generate_seed() const;
  std::uint64_t resolved_gp_seed() const;
  std::uint64_t resolved_uq_seed() const;

  /// Canonical resolved form: fixed section and key order, full-precision
  /// numbers, derived seeds spelled out. Hashing this string fingerprints
  /// the effective configuration of a run.
  std::string to_ini_string() const;
};

/// Strict INI: [section] headers, `key = value` lines, full-line comments
/// starting with '#' or ';'. Unknown sections, unknown keys and duplicate
/// keys are errors; messages carry origin and line number.
RunConfig parse_config(const std::string& text, const std::string& origin);
RunConfig load_config(const std::string& path);

}  // namespace foflux
