#include "foflux/physics.hpp"

#include <cmath>
#include <sstream>

#include "foflux/brent.hpp"
#include "foflux/errors.hpp"

namespace foflux {

namespace {

constexpr double kGasConstant = 8.314;  // J/(mol K)
constexpr double kReTransition = 2100.0;
constexpr double kExpArgLimit = 700.0;  // exp overflow guard

double polyval(const std::vector<double>& coeffs, double x) {
  double y = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) y = y * x + *it;
  return y;
}

struct ResidualTerms {
  double A = 0.0;
  double B = 0.0;
  double S = 0.0;
  double D_s = 0.0;
  double k = 0.0;
  double pi_d_bulk = 0.0;
  double pi_f_bulk = 0.0;
};

double eval_residual(double jw, const ResidualTerms& t) {
  const double arg_ecp = jw / t.k;
  const double arg_icp = jw * t.S / t.D_s;
  if (arg_ecp > kExpArgLimit || arg_icp > kExpArgLimit) {
    std::ostringstream os;
    os << "flux_residual: unphysical trial flux jw=" << jw << " m/s overflows exp ("
       << "jw/k=" << arg_ecp << ", jw*S/D=" << arg_icp << ")";
    throw SolverError(os.str());
  }
  const double e_icp = std::exp(-arg_icp);
  const double e_ecp = std::exp(arg_ecp);
  const double numer = t.pi_d_bulk * e_icp - t.pi_f_bulk * e_ecp;
  const double denom = 1.0 + (t.B / jw) * (e_ecp - e_icp);
  return jw - t.A * numer / denom;
}

ResidualTerms residual_terms(const OperatingPoint& point, const PhysicsConfig& cfg) {
  ResidualTerms t;
  t.A = point.A;
  t.B = cfg.B;
  t.S = structural_parameter(point.t_psl, point.tau, point.eps_psl);

  const FluidProperties feed = fluid_properties(point.cf_in, cfg);
  const FluidProperties draw = fluid_properties(point.cd_in, cfg);
  t.pi_f_bulk = feed.osmotic_pressure;
  t.pi_d_bulk = draw.osmotic_pressure;
  t.D_s = draw.D_s;  // ICP acts on the draw solute inside the support

  if (cfg.k_override) {
    t.k = *cfg.k_override;
    if (t.k <= 0.0) throw ConfigError("physics: k_override must be positive");
  } else {
    // Only the feed-side coefficient enters the flux equation.
    t.k = mass_transfer_coefficient(point.uf_in, point.L_x, point.t_c, feed, cfg).k;
  }
  return t;
}

}  // namespace

SherwoodMode sherwood_mode_from_string(const std::string& s) {
  if (s == "laminar-leveque") return SherwoodMode::laminar_leveque;
  if (s == "turbulent-power-law") return SherwoodMode::turbulent_power_law;
  if (s == "auto-by-Re" || s == "auto-by-re" || s == "auto") return SherwoodMode::auto_by_re;
  throw ConfigError("physics: unknown sherwood correlation '" + s + "'");
}

std::string to_string(SherwoodMode m) {
  switch (m) {
    case SherwoodMode::laminar_leveque: return "laminar-leveque";
    case SherwoodMode::turbulent_power_law: return "turbulent-power-law";
    case SherwoodMode::auto_by_re: return "auto-by-Re";
  }
  return "auto-by-Re";
}

void PhysicsConfig::validate() const {
  if (B < 0.0) throw ConfigError("physics: B must be >= 0");
  if (T <= 0.0) throw ConfigError("physics: T must be positive");
  if (vant_hoff_i < 1.0) throw ConfigError("physics: vant_hoff_i must be >= 1");
  if (D_s_ref <= 0.0) throw ConfigError("physics: D_s_ref must be positive");
  if (rho_ref <= 0.0 || mu_ref <= 0.0)
    throw ConfigError("physics: reference density/viscosity must be positive");
  if (solver_tol <= 0.0) throw ConfigError("physics: solver_tol must be positive");
  if (solver_max_iter < 1) throw ConfigError("physics: solver_max_iter must be >= 1");
  if (k_override && *k_override <= 0.0)
    throw ConfigError("physics: k_override must be positive");
}

double structural_parameter(double t_psl, double tau, double eps_psl) {
  if (eps_psl <= 0.0) throw DataError("structural_parameter: eps_psl must be positive");
  if (eps_psl > 1.0) throw DataError("structural_parameter: eps_psl must be <= 1");
  if (tau < 1.0) throw DataError("structural_parameter: tau must be >= 1");
  if (t_psl <= 0.0) throw DataError("structural_parameter: t_psl must be positive");
  return tau * t_psl / eps_psl;
}

FluidProperties fluid_properties(double c, const PhysicsConfig& cfg) {
  if (c < 0.0) throw DataError("fluid_properties: concentration must be >= 0");
  const auto& poly = cfg.property_correlations;
  FluidProperties p;

  p.density = poly.density.empty() ? cfg.rho_ref : polyval(poly.density, c);
  p.dynamic_viscosity = poly.viscosity.empty() ? cfg.mu_ref : polyval(poly.viscosity, c);
  p.D_s = poly.diffusivity.empty() ? cfg.D_s_ref : polyval(poly.diffusivity, c);
  if (poly.osmotic_pressure.empty()) {
    // van 't Hoff with c in mol/m^3
    p.osmotic_pressure = cfg.vant_hoff_i * (c * 1000.0) * kGasConstant * cfg.T;
  } else {
    p.osmotic_pressure = polyval(poly.osmotic_pressure, c);
  }

  if (p.density <= 0.0 || p.dynamic_viscosity <= 0.0 || p.D_s <= 0.0)
    throw DataError("fluid_properties: correlation gave a non-positive property at c=" +
                    std::to_string(c));
  if (p.osmotic_pressure < 0.0)
    throw DataError("fluid_properties: correlation gave a negative osmotic pressure at c=" +
                    std::to_string(c));
  return p;
}

HydroState mass_transfer_coefficient(double u, double L_x, double t_c,
                                     const FluidProperties& props, const PhysicsConfig& cfg) {
  if (u <= 0.0 || L_x <= 0.0 || t_c <= 0.0)
    throw DataError("mass_transfer_coefficient: u, L_x, t_c must be positive");

  HydroState h;
  h.d_h = 2.0 * t_c;  // parallel plates, infinite width
  h.Re = props.density * u * h.d_h / props.dynamic_viscosity;
  h.Sc = props.dynamic_viscosity / (props.density * props.D_s);

  bool laminar = false;
  switch (cfg.sherwood) {
    case SherwoodMode::laminar_leveque: laminar = true; break;
    case SherwoodMode::turbulent_power_law: laminar = false; break;
    case SherwoodMode::auto_by_re: laminar = h.Re < kReTransition; break;
  }
  h.Sh = laminar ? 1.85 * std::cbrt(h.Re * h.Sc * h.d_h / L_x)
                 : 0.04 * std::pow(h.Re, 0.75) * std::pow(h.Sc, 0.33);
  h.k = h.Sh * props.D_s / h.d_h;
  return h;
}

double flux_residual(double jw_trial, const OperatingPoint& point, const PhysicsConfig& cfg) {
  if (jw_trial <= 0.0)
    throw DataError("flux_residual: jw_trial must be positive (B/jw is singular at 0)");
  return eval_residual(jw_trial, residual_terms(point, cfg));
}

PhysicalFluxBreakdown solve_physical_flux(const OperatingPoint& point, const PhysicsConfig& cfg) {
  const ResidualTerms t = residual_terms(point, cfg);

  PhysicalFluxBreakdown out;
  out.S = t.S;
  out.k_feed = t.k;
  out.pi_d_bulk = t.pi_d_bulk;
  out.pi_f_bulk = t.pi_f_bulk;

  // No driving force or no permeability: jw = 0 exactly, interfaces at bulk.
  if (t.pi_d_bulk <= t.pi_f_bulk || t.A == 0.0) {
    out.pi_d_interface = t.pi_d_bulk;
    out.pi_f_membrane = t.pi_f_bulk;
    out.zero_driving_force = true;
    return out;
  }

  const double lo = 1e-12;
  const double hi = 1.01 * t.A * t.pi_d_bulk;  // flux cannot exceed the ideal-membrane flux
  auto f = [&t](double jw) { return eval_residual(jw, t); };
  const double f_lo = f(lo);
  const double f_hi = f(hi);
  if (f_lo * f_hi > 0.0) {
    std::ostringstream os;
    os << "solve_physical_flux: no sign change in bracket [" << lo << ", " << hi
       << "], F(lo)=" << f_lo << ", F(hi)=" << f_hi;
    throw SolverError(os.str());
  }

  const BrentResult r = brent_solve(f, lo, hi, f_lo, f_hi, cfg.solver_tol, cfg.solver_max_iter);
  out.jw = r.root;
  out.residual = std::abs(r.f_root);
  out.iterations = r.iterations;

  // Interface pressures consistent with the solved flux. At the root,
  // pi_d_interface - pi_f_membrane = jw/A holds by construction.
  const double e_icp = std::exp(-out.jw * t.S / t.D_s);
  const double e_ecp = std::exp(out.jw / t.k);
  const double b_over_a = t.A > 0.0 ? t.B / t.A : 0.0;
  out.pi_d_interface = t.pi_d_bulk * e_icp - b_over_a * (1.0 - e_icp);
  out.pi_f_membrane = t.pi_f_bulk * e_ecp + b_over_a * (e_ecp - 1.0);
  return out;
}

}  // namespace foflux
