#include "foflux/types.hpp"

#include <cmath>
#include <sstream>

#include "foflux/errors.hpp"

namespace foflux {

std::size_t feature_index(const std::string& name) {
  const auto& names = feature_names();
  for (std::size_t i = 0; i < kNumFeatures; ++i)
    if (names[i] == name) return i;
  return kNumFeatures;
}

FeatureVector OperatingPoint::to_vector() const {
  FeatureVector v;
  v << cf_in, cd_in, uf_in, ud_in, A, eps_psl, tau, t_psl, L_x, t_c;
  return v;
}

OperatingPoint OperatingPoint::from_vector(const FeatureVector& v) {
  OperatingPoint p;
  for (std::size_t i = 0; i < kNumFeatures; ++i) p.set(i, v(static_cast<Eigen::Index>(i)));
  return p;
}

double OperatingPoint::get(std::size_t feature) const {
  switch (feature) {
    case kCfIn: return cf_in;
    case kCdIn: return cd_in;
    case kUfIn: return uf_in;
    case kUdIn: return ud_in;
    case kA: return A;
    case kEpsPsl: return eps_psl;
    case kTau: return tau;
    case kTPsl: return t_psl;
    case kLx: return L_x;
    case kTc: return t_c;
    default: throw DataError("OperatingPoint::get: feature index out of range");
  }
}

void OperatingPoint::set(std::size_t feature, double value) {
  switch (feature) {
    case kCfIn: cf_in = value; break;
    case kCdIn: cd_in = value; break;
    case kUfIn: uf_in = value; break;
    case kUdIn: ud_in = value; break;
    case kA: A = value; break;
    case kEpsPsl: eps_psl = value; break;
    case kTau: tau = value; break;
    case kTPsl: t_psl = value; break;
    case kLx: L_x = value; break;
    case kTc: t_c = value; break;
    default: throw DataError("OperatingPoint::set: feature index out of range");
  }
}

void OperatingPoint::validate(const std::string& context) const {
  const std::string at = context.empty() ? std::string() : context + ": ";
  auto fail = [&at](const std::string& msg) { throw DataError(at + msg); };

  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    const double v = get(i);
    if (!std::isfinite(v)) fail("feature " + feature_names()[i] + " is not finite");
  }
  if (cf_in < 0.0) fail("cf_in must be >= 0");
  if (cd_in <= 0.0) fail("cd_in must be positive");
  if (uf_in <= 0.0) fail("uf_in must be positive");
  if (ud_in <= 0.0) fail("ud_in must be positive");
  if (A <= 0.0) fail("A must be positive");
  if (eps_psl <= 0.0 || eps_psl > 1.0) fail("eps_psl must lie in (0, 1]");
  if (tau < 1.0) fail("tau must be >= 1");
  if (t_psl <= 0.0) fail("t_psl must be positive");
  if (L_x <= 0.0) fail("L_x must be positive");
  if (t_c <= 0.0) fail("t_c must be positive");
}

bool OperatingPoint::is_valid() const {
  try {
    validate();
    return true;
  } catch (const DataError&) {
    return false;
  }
}

std::size_t first_invalid_feature(const OperatingPoint& p) {
  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    const double v = p.get(i);
    if (!std::isfinite(v)) return i;
    switch (i) {
      case kCfIn:
        if (v < 0.0) return i;
        break;
      case kEpsPsl:
        if (v <= 0.0 || v > 1.0) return i;
        break;
      case kTau:
        if (v < 1.0) return i;
        break;
      default:
        if (v <= 0.0) return i;
        break;
    }
  }
  return kNumFeatures;
}

}  // namespace foflux
