#include "foflux/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <utility>
#include <vector>

#include "foflux/csv.hpp"
#include "foflux/errors.hpp"
#include "foflux/hash.hpp"

namespace foflux {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

struct IniEntry {
  std::string value;
  int line = 0;
  bool used = false;
};

struct ParsedIni {
  std::map<std::string, std::map<std::string, IniEntry>> sections;
  std::map<std::string, int> section_lines;
};

ParsedIni parse_ini(const std::string& text, const std::string& origin) {
  ParsedIni file;
  std::istringstream in(text);
  std::string raw, section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    const std::string at = origin + ":" + std::to_string(line_no);

    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3)
        throw ConfigError(at + ": malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(at + ": empty section name");
      file.sections[section];
      file.section_lines.emplace(section, line_no);
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(at + ": expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(at + ": empty key");
    if (section.empty())
      throw ConfigError(at + ": key '" + key + "' appears before any [section]");

    const auto [it, inserted] = file.sections[section].emplace(key, IniEntry{value, line_no, false});
    if (!inserted)
      throw ConfigError(at + ": duplicate key '" + key + "' in [" + section + "] (first at line " +
                        std::to_string(it->second.line) + ")");
  }
  return file;
}

/// Hands out typed values and remembers what was consumed, so anything left
/// over can be reported as an unknown key.
class Reader {
 public:
  Reader(ParsedIni& file, std::string origin) : file_(file), origin_(std::move(origin)) {}

  std::optional<std::pair<std::string, std::string>> take(const std::string& section,
                                                          const std::string& key) {
    auto sec = file_.sections.find(section);
    if (sec == file_.sections.end()) return std::nullopt;
    auto it = sec->second.find(key);
    if (it == sec->second.end()) return std::nullopt;
    it->second.used = true;
    return std::make_pair(it->second.value,
                          origin_ + ":" + std::to_string(it->second.line) + ": [" + section +
                              "] " + key);
  }

  void take_double(const std::string& section, const std::string& key, double& out) {
    if (auto v = take(section, key)) out = parse_double(v->first, v->second);
  }
  void take_positive(const std::string& section, const std::string& key, double& out) {
    if (auto v = take(section, key)) {
      const double x = parse_double(v->first, v->second);
      if (!(x > 0.0)) throw ConfigError(v->second + ": must be > 0, got '" + v->first + "'");
      out = x;
    }
  }
  void take_u64(const std::string& section, const std::string& key, std::uint64_t& out) {
    if (auto v = take(section, key)) out = parse_u64(v->first, v->second);
  }
  void take_opt_u64(const std::string& section, const std::string& key,
                    std::optional<std::uint64_t>& out) {
    if (auto v = take(section, key)) out = parse_u64(v->first, v->second);
  }
  void take_size(const std::string& section, const std::string& key, std::size_t& out,
                 std::size_t min_value) {
    if (auto v = take(section, key)) {
      const std::uint64_t x = parse_u64(v->first, v->second);
      if (x < min_value)
        throw ConfigError(v->second + ": must be at least " + std::to_string(min_value));
      out = static_cast<std::size_t>(x);
    }
  }
  void take_int(const std::string& section, const std::string& key, int& out, int min_value) {
    if (auto v = take(section, key)) {
      const std::uint64_t x = parse_u64(v->first, v->second);
      if (x > static_cast<std::uint64_t>(std::numeric_limits<int>::max()) ||
          static_cast<int>(x) < min_value)
        throw ConfigError(v->second + ": must be an integer >= " + std::to_string(min_value));
      out = static_cast<int>(x);
    }
  }
  void take_string(const std::string& section, const std::string& key, std::string& out) {
    if (auto v = take(section, key)) out = v->first;
  }

  void check_all_consumed() const {
    for (const auto& [name, entries] : file_.sections) {
      if (!known_sections().count(name))
        throw ConfigError(origin_ + ":" + std::to_string(file_.section_lines.at(name)) +
                          ": unknown section [" + name + "]");
      for (const auto& [key, entry] : entries)
        if (!entry.used)
          throw ConfigError(origin_ + ":" + std::to_string(entry.line) + ": unknown key '" + key +
                            "' in [" + name + "]");
    }
  }

  static double parse_double(const std::string& v, const std::string& where) {
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(x))
      throw ConfigError(where + ": '" + v + "' is not a finite number");
    return x;
  }

  static std::uint64_t parse_u64(const std::string& v, const std::string& where) {
    if (v.empty() || v[0] == '-' || v[0] == '+')
      throw ConfigError(where + ": '" + v + "' is not a non-negative integer");
    errno = 0;
    char* end = nullptr;
    const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (end != v.c_str() + v.size() || errno == ERANGE)
      throw ConfigError(where + ": '" + v + "' is not a non-negative integer");
    return static_cast<std::uint64_t>(x);
  }

  static std::vector<double> parse_double_list(const std::string& v, const std::string& where) {
    std::vector<double> out;
    if (trim(v).empty()) return out;
    std::istringstream in(v);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(parse_double(trim(item), where));
    return out;
  }

  const std::string& origin() const { return origin_; }

 private:
  static const std::set<std::string>& known_sections() {
    static const std::set<std::string> s = {"run",     "dataset", "schema", "ranges",
                                            "generate", "physics", "gp",     "cv",
                                            "correlation", "uq",   "predict"};
    return s;
  }

  ParsedIni& file_;
  std::string origin_;
};

std::size_t require_feature(const std::string& name, const std::string& where) {
  const std::size_t idx = feature_index(name);
  if (idx == kNumFeatures) throw ConfigError(where + ": unknown feature '" + name + "'");
  return idx;
}

// "column:unit" -- the unit never contains ':', so split at the last one.
ColumnSpec parse_column_spec(const std::string& v, const std::string& where) {
  const auto pos = v.rfind(':');
  if (pos == std::string::npos || pos == 0 || pos + 1 == v.size())
    throw ConfigError(where + ": expected 'column:unit', got '" + v + "'");
  return ColumnSpec{trim(v.substr(0, pos)), trim(v.substr(pos + 1))};
}

}  // namespace

FeatureVector default_cv() {
  FeatureVector cv;
  cv << 0.02, 0.02, 0.05, 0.05, 0.05, 0.10, 0.10, 0.10, 0.01, 0.01;
  return cv;
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
  ParsedIni ini = parse_ini(text, origin);
  Reader r(ini, origin);
  RunConfig cfg;

  r.take_string("run", "out_dir", cfg.out_dir);
  r.take_u64("run", "seed", cfg.seed);

  r.take_string("dataset", "path", cfg.dataset_path);
  r.take_size("dataset", "n_train", cfg.n_train, 2);
  if (auto v = r.take("dataset", "split_mode")) {
    try {
      cfg.split_mode = split_mode_from_string(v->first);
    } catch (const ConfigError&) {
      throw ConfigError(v->second + ": unknown split mode '" + v->first + "'");
    }
  }
  r.take_opt_u64("dataset", "split_seed", cfg.split_seed);

  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    if (auto v = r.take("schema", feature_names()[i]))
      cfg.schema.features[i] = parse_column_spec(v->first, v->second);
    if (auto v = r.take("ranges", feature_names()[i])) {
      const auto pos = v->first.find(':');
      if (pos == std::string::npos)
        throw ConfigError(v->second + ": expected 'lo:hi', got '" + v->first + "'");
      FeatureRange range;
      range.lo = Reader::parse_double(trim(v->first.substr(0, pos)), v->second);
      range.hi = Reader::parse_double(trim(v->first.substr(pos + 1)), v->second);
      if (!(range.lo < range.hi))
        throw ConfigError(v->second + ": range needs lo < hi, got '" + v->first + "'");
      cfg.synthetic.ranges[i] = range;
    }
    if (auto v = r.take("cv", feature_names()[i])) {
      const double x = Reader::parse_double(v->first, v->second);
      if (x < 0.0) throw ConfigError(v->second + ": coefficient of variation must be >= 0");
      cfg.cv[static_cast<Eigen::Index>(i)] = x;
    }
  }
  if (auto v = r.take("schema", "jw")) cfg.schema.jw = parse_column_spec(v->first, v->second);

  r.take_size("generate", "n", cfg.synthetic.n, 2);
  r.take_double("generate", "noise_cv", cfg.synthetic.noise_cv);
  r.take_double("generate", "delta_amplitude", cfg.synthetic.residual.amplitude);
  if (auto v = r.take("generate", "delta_feature_1"))
    cfg.synthetic.residual.feature_1 = require_feature(v->first, v->second);
  if (auto v = r.take("generate", "delta_feature_2"))
    cfg.synthetic.residual.feature_2 = require_feature(v->first, v->second);
  r.take_double("generate", "delta_freq_1", cfg.synthetic.residual.freq_1);
  r.take_double("generate", "delta_freq_2", cfg.synthetic.residual.freq_2);
  r.take_opt_u64("generate", "seed", cfg.generate_seed);

  r.take_positive("physics", "B", cfg.physics.B);
  r.take_positive("physics", "T", cfg.physics.T);
  r.take_positive("physics", "vant_hoff_i", cfg.physics.vant_hoff_i);
  r.take_positive("physics", "D_s_ref", cfg.physics.D_s_ref);
  r.take_positive("physics", "rho_ref", cfg.physics.rho_ref);
  r.take_positive("physics", "mu_ref", cfg.physics.mu_ref);
  if (auto v = r.take("physics", "density_poly"))
    cfg.physics.property_correlations.density = Reader::parse_double_list(v->first, v->second);
  if (auto v = r.take("physics", "viscosity_poly"))
    cfg.physics.property_correlations.viscosity = Reader::parse_double_list(v->first, v->second);
  if (auto v = r.take("physics", "diffusivity_poly"))
    cfg.physics.property_correlations.diffusivity = Reader::parse_double_list(v->first, v->second);
  if (auto v = r.take("physics", "osmotic_pressure_poly"))
    cfg.physics.property_correlations.osmotic_pressure =
        Reader::parse_double_list(v->first, v->second);
  if (auto v = r.take("physics", "sherwood")) {
    try {
      cfg.physics.sherwood = sherwood_mode_from_string(v->first);
    } catch (const ConfigError&) {
      throw ConfigError(v->second + ": unknown Sherwood correlation '" + v->first + "'");
    }
  }
  if (auto v = r.take("physics", "k_override")) {
    if (v->first == "none")
      cfg.physics.k_override.reset();
    else {
      const double k = Reader::parse_double(v->first, v->second);
      if (!(k > 0.0)) throw ConfigError(v->second + ": k_override must be > 0 or 'none'");
      cfg.physics.k_override = k;
    }
  }
  r.take_positive("physics", "solver_tol", cfg.physics.solver_tol);
  r.take_int("physics", "solver_max_iter", cfg.physics.solver_max_iter, 1);

  r.take_int("gp", "restarts", cfg.gp.restarts, 1);
  r.take_int("gp", "max_evaluations", cfg.gp.max_evaluations, 10);
  r.take_opt_u64("gp", "seed", cfg.gp_seed);
  r.take_double("gp", "log_ell_lo", cfg.gp.log_ell_lo);
  r.take_double("gp", "log_ell_hi", cfg.gp.log_ell_hi);
  r.take_double("gp", "log_sf2_lo", cfg.gp.log_sf2_lo);
  r.take_double("gp", "log_sf2_hi", cfg.gp.log_sf2_hi);
  r.take_double("gp", "log_sn2_lo", cfg.gp.log_sn2_lo);
  r.take_double("gp", "log_sn2_hi", cfg.gp.log_sn2_hi);

  if (auto sec = ini.sections.find("correlation"); sec != ini.sections.end()) {
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (auto& [key, entry] : sec->second) {
      entry.used = true;
      const std::string where =
          origin + ":" + std::to_string(entry.line) + ": [correlation] " + key;
      const auto pos = key.find(':');
      if (pos == std::string::npos)
        throw ConfigError(where + ": expected 'feature:feature' as the key");
      const std::size_t a = require_feature(trim(key.substr(0, pos)), where);
      const std::size_t b = require_feature(trim(key.substr(pos + 1)), where);
      if (a == b) throw ConfigError(where + ": a feature cannot correlate with itself");
      const auto pair = std::minmax(a, b);
      if (!seen.insert(pair).second)
        throw ConfigError(where + ": correlation for this pair was already given");
      const double rho = Reader::parse_double(entry.value, where);
      if (std::abs(rho) > 1.0)
        throw ConfigError(where + ": correlation must lie in [-1, 1]");
      cfg.correlation(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = rho;
      cfg.correlation(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = rho;
    }
  }

  r.take_size("uq", "n_samples", cfg.uq_n_samples, 2);
  r.take_size("uq", "n_points", cfg.uq_n_points, 1);
  r.take_positive("uq", "rel_step", cfg.uq_rel_step);
  r.take_opt_u64("uq", "seed", cfg.uq_seed);

  r.take_string("predict", "points", cfg.predict_points_path);

  r.check_all_consumed();

  cfg.synthetic.validate();
  cfg.physics.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

std::uint64_t RunConfig::resolved_split_seed() const {
  return split_seed ? *split_seed : derive_seed(seed, std::string("split"));
}
std::uint64_t RunConfig::resolved_generate_seed() const {
  return generate_seed ? *generate_seed : derive_seed(seed, std::string("generate"));
}
std::uint64_t RunConfig::resolved_gp_seed() const {
  return gp_seed ? *gp_seed : derive_seed(seed, std::string("gp"));
}
std::uint64_t RunConfig::resolved_uq_seed() const {
  return uq_seed ? *uq_seed : derive_seed(seed, std::string("uq"));
}

std::string RunConfig::to_ini_string() const {
  std::ostringstream out;
  const auto join = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ",";
      s += format_full(v[i]);
    }
    return s;
  };

  out << "[run]\n";
  out << "out_dir = " << out_dir << "\n";
  out << "seed = " << seed << "\n";

  out << "[dataset]\n";
  out << "path = " << dataset_path << "\n";
  out << "n_train = " << n_train << "\n";
  out << "split_mode = " << to_string(split_mode) << "\n";
  out << "split_seed = " << resolved_split_seed() << "\n";

  out << "[schema]\n";
  for (std::size_t i = 0; i < kNumFeatures; ++i)
    out << feature_names()[i] << " = " << schema.features[i].column << ":"
        << schema.features[i].unit << "\n";
  out << "jw = " << schema.jw.column << ":" << schema.jw.unit << "\n";

  out << "[ranges]\n";
  for (std::size_t i = 0; i < kNumFeatures; ++i)
    out << feature_names()[i] << " = " << format_full(synthetic.ranges[i].lo) << ":"
        << format_full(synthetic.ranges[i].hi) << "\n";

  out << "[generate]\n";
  out << "n = " << synthetic.n << "\n";
  out << "noise_cv = " << format_full(synthetic.noise_cv) << "\n";
  out << "delta_amplitude = " << format_full(synthetic.residual.amplitude) << "\n";
  out << "delta_feature_1 = " << feature_names()[synthetic.residual.feature_1] << "\n";
  out << "delta_feature_2 = " << feature_names()[synthetic.residual.feature_2] << "\n";
  out << "delta_freq_1 = " << format_full(synthetic.residual.freq_1) << "\n";
  out << "delta_freq_2 = " << format_full(synthetic.residual.freq_2) << "\n";
  out << "seed = " << resolved_generate_seed() << "\n";

  out << "[physics]\n";
  out << "B = " << format_full(physics.B) << "\n";
  out << "T = " << format_full(physics.T) << "\n";
  out << "vant_hoff_i = " << format_full(physics.vant_hoff_i) << "\n";
  out << "D_s_ref = " << format_full(physics.D_s_ref) << "\n";
  out << "rho_ref = " << format_full(physics.rho_ref) << "\n";
  out << "mu_ref = " << format_full(physics.mu_ref) << "\n";
  out << "density_poly = " << join(physics.property_correlations.density) << "\n";
  out << "viscosity_poly = " << join(physics.property_correlations.viscosity) << "\n";
  out << "diffusivity_poly = " << join(physics.property_correlations.diffusivity) << "\n";
  out << "osmotic_pressure_poly = " << join(physics.property_correlations.osmotic_pressure)
      << "\n";
  out << "sherwood = " << to_string(physics.sherwood) << "\n";
  out << "k_override = " << (physics.k_override ? format_full(*physics.k_override) : "none")
      << "\n";
  out << "solver_tol = " << format_full(physics.solver_tol) << "\n";
  out << "solver_max_iter = " << physics.solver_max_iter << "\n";

  out << "[gp]\n";
  out << "restarts = " << gp.restarts << "\n";
  out << "max_evaluations = " << gp.max_evaluations << "\n";
  out << "seed = " << resolved_gp_seed() << "\n";
  out << "log_ell_lo = " << format_full(gp.log_ell_lo) << "\n";
  out << "log_ell_hi = " << format_full(gp.log_ell_hi) << "\n";
  out << "log_sf2_lo = " << format_full(gp.log_sf2_lo) << "\n";
  out << "log_sf2_hi = " << format_full(gp.log_sf2_hi) << "\n";
  out << "log_sn2_lo = " << format_full(gp.log_sn2_lo) << "\n";
  out << "log_sn2_hi = " << format_full(gp.log_sn2_hi) << "\n";

  out << "[cv]\n";
  for (std::size_t i = 0; i < kNumFeatures; ++i)
    out << feature_names()[i] << " = " << format_full(cv[static_cast<Eigen::Index>(i)]) << "\n";

  out << "[correlation]\n";
  for (std::size_t i = 0; i < kNumFeatures; ++i)
    for (std::size_t j = i + 1; j < kNumFeatures; ++j) {
      const double rho = correlation(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (rho != 0.0)
        out << feature_names()[i] << ":" << feature_names()[j] << " = " << format_full(rho)
            << "\n";
    }

  out << "[uq]\n";
  out << "n_samples = " << uq_n_samples << "\n";
  out << "n_points = " << uq_n_points << "\n";
  out << "rel_step = " << format_full(uq_rel_step) << "\n";
  out << "seed = " << resolved_uq_seed() << "\n";

  out << "[predict]\n";
  out << "points = " << predict_points_path << "\n";
  return out.str();
}

}  // namespace foflux
