#include "foflux/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "foflux/csv.hpp"
#include "foflux/errors.hpp"
#include "foflux/hash.hpp"

namespace foflux {

std::string Provenance::to_string() const {
  if (kind == Kind::experimental) return "experimental";
  return "synthetic(seed=" + std::to_string(seed) + ")";
}

void Dataset::validate() const {
  if (points.size() != jw_measured.size())
    throw DataError("dataset: points and jw_measured lengths differ");
  for (std::size_t i = 0; i < points.size(); ++i) {
    points[i].validate("row " + std::to_string(i));
    const double jw = jw_measured[i];
    if (!std::isfinite(jw)) throw DataError("row " + std::to_string(i) + ": jw is not finite");
    if (jw < 0.0) throw DataError("row " + std::to_string(i) + ": jw must be >= 0");
  }
}

Eigen::MatrixXd Dataset::feature_matrix() const {
  Eigen::MatrixXd X(points.size(), kNumFeatures);
  for (std::size_t i = 0; i < points.size(); ++i)
    X.row(static_cast<Eigen::Index>(i)) = points[i].to_vector().transpose();
  return X;
}

FeatureVector StandardizationStats::standardize(const FeatureVector& x) const {
  return (x - mean).cwiseQuotient(std);
}

FeatureVector StandardizationStats::destandardize(const FeatureVector& z) const {
  return mean + z.cwiseProduct(std);
}

Eigen::MatrixXd StandardizationStats::standardize_rows(const Eigen::MatrixXd& X) const {
  Eigen::MatrixXd Z = X;
  Z.rowwise() -= mean.transpose();
  Z.array().rowwise() /= std.transpose().array();
  return Z;
}

StandardizationStats fit_standardizer(const Dataset& train) {
  const std::size_t n = train.size();
  if (n < 2) throw DataError("fit_standardizer: need at least 2 rows");

  const Eigen::MatrixXd X = train.feature_matrix();
  StandardizationStats s;
  s.mean = X.colwise().mean().transpose();
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(kNumFeatures); ++j) {
    const double var =
        (X.col(j).array() - s.mean(j)).square().sum() / static_cast<double>(n);
    s.std(j) = std::sqrt(var);
    if (!(s.std(j) > 0.0))
      throw DataError("fit_standardizer: feature '" + feature_names()[static_cast<std::size_t>(j)] +
                      "' is constant over the training set");
  }
  return s;
}

SplitMode split_mode_from_string(const std::string& s) {
  if (s == "deterministic-first-k" || s == "first-k") return SplitMode::deterministic_first_k;
  if (s == "seeded-shuffle" || s == "shuffle") return SplitMode::seeded_shuffle;
  throw ConfigError("split: unknown mode '" + s + "'");
}

std::string to_string(SplitMode m) {
  return m == SplitMode::deterministic_first_k ? "deterministic-first-k" : "seeded-shuffle";
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, const SplitSpec& spec) {
  const std::size_t n = dataset.size();
  if (spec.n_train == 0 || spec.n_train >= n) {
    std::ostringstream os;
    os << "split: n_train=" << spec.n_train << " must lie in (0, " << n << ")";
    throw ConfigError(os.str());
  }

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (spec.mode == SplitMode::seeded_shuffle) {
    std::mt19937_64 rng(spec.seed);
    std::shuffle(idx.begin(), idx.end(), rng);
  }

  Dataset train, test;
  train.provenance = dataset.provenance;
  test.provenance = dataset.provenance;
  for (std::size_t i = 0; i < n; ++i) {
    Dataset& dst = i < spec.n_train ? train : test;
    dst.points.push_back(dataset.points[idx[i]]);
    dst.jw_measured.push_back(dataset.jw_measured[idx[i]]);
  }
  return {std::move(train), std::move(test)};
}

// ---- CSV ingestion ---------------------------------------------------------

DatasetSchema DatasetSchema::si_defaults() {
  DatasetSchema s;
  static const std::array<std::string, kNumFeatures> units = {
      "M", "M", "m/s", "m/s", "m/Pa/s", "-", "-", "m", "m", "m"};
  for (std::size_t i = 0; i < kNumFeatures; ++i)
    s.features[i] = {feature_names()[i], units[i]};
  s.jw = {"jw", "m/s"};
  return s;
}

namespace {

enum class UnitKind { concentration, velocity, permeability, dimensionless, length };

UnitKind unit_kind(std::size_t feature) {
  switch (feature) {
    case kCfIn: case kCdIn: return UnitKind::concentration;
    case kUfIn: case kUdIn: return UnitKind::velocity;
    case kA: return UnitKind::permeability;
    case kEpsPsl: case kTau: return UnitKind::dimensionless;
    default: return UnitKind::length;
  }
}

}  // namespace

double unit_to_si_factor(std::size_t feature, const std::string& unit) {
  switch (unit_kind(feature)) {
    case UnitKind::concentration:
      if (unit == "M" || unit == "mol/L") return 1.0;
      if (unit == "mM") return 1e-3;
      if (unit == "mol/m3") return 1e-3;  // dataset convention keeps mol/L
      break;
    case UnitKind::velocity:
      if (unit == "m/s") return 1.0;
      if (unit == "cm/s") return 1e-2;
      break;
    case UnitKind::permeability:
      if (unit == "m/Pa/s" || unit == "m/(Pa s)") return 1.0;
      if (unit == "LMH/bar") return 1.0 / 3.6e6 / 1e5;
      break;
    case UnitKind::dimensionless:
      if (unit == "-" || unit.empty()) return 1.0;
      break;
    case UnitKind::length:
      if (unit == "m") return 1.0;
      if (unit == "mm") return 1e-3;
      if (unit == "um") return 1e-6;
      break;
  }
  throw ConfigError("schema: unit '" + unit + "' not valid for feature '" +
                    feature_names()[feature] + "'");
}

double flux_unit_to_si_factor(const std::string& unit) {
  if (unit == "m/s") return 1.0;
  if (unit == "LMH") return 1.0 / 3.6e6;  // 1 L/m^2/h = 1/3.6e6 m/s
  throw ConfigError("schema: unknown flux unit '" + unit + "'");
}

namespace {

Dataset load_table(const std::string& path, const DatasetSchema& schema, bool require_jw) {
  const CsvTable t = read_csv(path);

  std::array<std::size_t, kNumFeatures> col{};
  std::array<double, kNumFeatures> factor{};
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    if (!t.has_column(schema.features[f].column))
      throw DataError("load_dataset: '" + path + "' is missing column '" +
                      schema.features[f].column + "' (feature " + feature_names()[f] + ")");
    col[f] = t.column(schema.features[f].column);
    factor[f] = unit_to_si_factor(f, schema.features[f].unit);
  }

  const bool have_jw = t.has_column(schema.jw.column);
  if (require_jw && !have_jw)
    throw DataError("load_dataset: '" + path + "' is missing column '" + schema.jw.column +
                    "' (measured flux)");
  std::size_t jw_col = 0;
  double jw_factor = 1.0;
  if (have_jw) {
    jw_col = t.column(schema.jw.column);
    jw_factor = flux_unit_to_si_factor(schema.jw.unit);
  }

  Dataset ds;
  ds.provenance.kind = Provenance::Kind::experimental;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string ctx = "'" + path + "' row " + std::to_string(r);
    OperatingPoint p;
    for (std::size_t f = 0; f < kNumFeatures; ++f)
      p.set(f, factor[f] * parse_cell(t.rows[r][col[f]], ctx + " column " + schema.features[f].column));
    p.validate(ctx);
    ds.points.push_back(p);
    if (have_jw) {
      const double jw = jw_factor * parse_cell(t.rows[r][jw_col], ctx + " column " + schema.jw.column);
      if (jw < 0.0) throw DataError(ctx + ": jw must be >= 0");
      ds.jw_measured.push_back(jw);
    }
  }
  if (have_jw) ds.validate();
  return ds;
}

}  // namespace

Dataset load_dataset(const std::string& path, const DatasetSchema& schema) {
  return load_table(path, schema, /*require_jw=*/true);
}

Dataset load_points(const std::string& path, const DatasetSchema& schema) {
  return load_table(path, schema, /*require_jw=*/false);
}

void write_dataset(const std::string& path, const Dataset& dataset, const DatasetSchema& schema) {
  CsvTable t;
  for (std::size_t f = 0; f < kNumFeatures; ++f) t.header.push_back(schema.features[f].column);
  const bool have_jw = !dataset.jw_measured.empty();
  if (have_jw) t.header.push_back(schema.jw.column);

  std::array<double, kNumFeatures> factor{};
  for (std::size_t f = 0; f < kNumFeatures; ++f)
    factor[f] = unit_to_si_factor(f, schema.features[f].unit);
  const double jw_factor = have_jw ? flux_unit_to_si_factor(schema.jw.unit) : 1.0;

  for (std::size_t i = 0; i < dataset.size(); ++i) {
    std::vector<std::string> row;
    for (std::size_t f = 0; f < kNumFeatures; ++f)
      row.push_back(format_full(dataset.points[i].get(f) / factor[f]));
    if (have_jw) row.push_back(format_full(dataset.jw_measured[i] / jw_factor));
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t);
}

// ---- Synthetic ground truth ------------------------------------------------

double ResidualSpec::evaluate(const FeatureVector& z,
                              const std::array<FeatureRange, kNumFeatures>& ranges) const {
  auto zhat = [&](std::size_t f) {
    const auto& r = ranges[f];
    const double mid = 0.5 * (r.lo + r.hi);
    const double sd = (r.hi - r.lo) / std::sqrt(12.0);
    return (z(static_cast<Eigen::Index>(f)) - mid) / sd;
  };
  return amplitude * std::sin(freq_1 * zhat(feature_1)) * std::cos(freq_2 * zhat(feature_2));
}

std::array<FeatureRange, kNumFeatures> SyntheticSpec::default_ranges() {
  // Bench-scale FO unit with an NaCl draw; spans keep every point solvable.
  std::array<FeatureRange, kNumFeatures> r{};
  r[kCfIn] = {0.01, 0.03};      // M
  r[kCdIn] = {0.8, 1.6};        // M
  r[kUfIn] = {0.08, 0.20};      // m/s
  r[kUdIn] = {0.08, 0.20};      // m/s
  r[kA] = {8e-13, 1.6e-12};     // m/(Pa s)
  r[kEpsPsl] = {0.35, 0.65};
  r[kTau] = {1.3, 2.2};
  r[kTPsl] = {6e-5, 1.2e-4};    // m
  r[kLx] = {0.08, 0.15};        // m
  r[kTc] = {1.5e-3, 2.5e-3};    // m
  return r;
}

void SyntheticSpec::validate() const {
  if (n < 2) throw ConfigError("generate: n must be >= 2");
  if (noise_cv < 0.0) throw ConfigError("generate: noise_cv must be >= 0");
  if (residual.amplitude < 0.0 || residual.amplitude > 0.15)
    throw ConfigError("generate: delta amplitude must lie in [0, 0.15]");
  if (residual.feature_1 >= kNumFeatures || residual.feature_2 >= kNumFeatures)
    throw ConfigError("generate: delta feature index out of range");
  OperatingPoint lo_pt, hi_pt;
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    const auto& r = ranges[f];
    if (!(r.lo < r.hi))
      throw ConfigError("generate: range for '" + feature_names()[f] + "' must have lo < hi");
    lo_pt.set(f, r.lo);
    hi_pt.set(f, r.hi);
  }
  lo_pt.validate("generate: range lower corner");
  hi_pt.validate("generate: range upper corner");
}

Dataset generate_synthetic(const SyntheticSpec& spec, const PhysicsConfig& physics) {
  spec.validate();
  physics.validate();

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Dataset ds;
  ds.provenance = {Provenance::Kind::synthetic, spec.seed};

  const std::size_t retry_cap = 100 + spec.n / 10;
  std::size_t retries = 0;
  while (ds.points.size() < spec.n) {
    OperatingPoint p;
    for (std::size_t f = 0; f < kNumFeatures; ++f) {
      const auto& r = spec.ranges[f];
      p.set(f, r.lo + (r.hi - r.lo) * unit(rng));
    }
    double jw_phys;
    try {
      jw_phys = solve_physical_flux(p, physics).jw;
    } catch (const SolverError& e) {
      if (++retries > retry_cap)
        throw SolverError(std::string("generate_synthetic: physics solver kept failing (") +
                          e.what() + ")");
      continue;
    }
    const double delta = spec.residual.evaluate(p.to_vector(), spec.ranges);
    const double noise = spec.noise_cv > 0.0 ? spec.noise_cv * gauss(rng) : 0.0;
    ds.points.push_back(p);
    ds.jw_measured.push_back(jw_phys * (1.0 + delta) * (1.0 + noise));
  }
  ds.validate();
  return ds;
}

}  // namespace foflux
