#pragma once

#include <optional>
#include <string>
#include <vector>

#include "foflux/types.hpp"

namespace foflux {

enum class SherwoodMode { laminar_leveque, turbulent_power_law, auto_by_re };

SherwoodMode sherwood_mode_from_string(const std::string& s);
std::string to_string(SherwoodMode m);

// Optional polynomial property correlations, coefficients in ascending powers
// of concentration (mol/L), evaluating directly to the SI property value.
struct PropertyPolynomials {
  std::vector<double> density;           // kg/m^3
  std::vector<double> viscosity;         // Pa s
  std::vector<double> diffusivity;       // m^2/s
  std::vector<double> osmotic_pressure;  // Pa
};

/// Constants of the transport model that are not operating-point features.
/// Defaults describe NaCl in water at 298.15 K.
struct PhysicsConfig {
  double B = 1e-7;             // salt permeability, m/s
  double T = 298.15;           // absolute temperature, K
  double vant_hoff_i = 2.0;    // dissociation factor, -
  double D_s_ref = 1.49e-9;    // solute diffusivity at T, m^2/s
  double rho_ref = 997.0;      // reference water density, kg/m^3
  double mu_ref = 8.9e-4;      // reference water viscosity, Pa s
  PropertyPolynomials property_correlations;  // empty vectors -> defaults
  SherwoodMode sherwood = SherwoodMode::auto_by_re;
  std::optional<double> k_override;  // pins the mass-transfer coefficient, m/s
  double solver_tol = 1e-14;   // |F(jw)| stopping criterion, m/s
  int solver_max_iter = 200;

  void validate() const;
};

struct FluidProperties {
  double density = 0.0;           // kg/m^3
  double dynamic_viscosity = 0.0; // Pa s
  double D_s = 0.0;               // m^2/s
  double osmotic_pressure = 0.0;  // Pa
};

struct HydroState {
  double d_h = 0.0;  // hydraulic diameter, m
  double Re = 0.0;
  double Sc = 0.0;
  double Sh = 0.0;
  double k = 0.0;    // mass-transfer coefficient, m/s
};

struct PhysicalFluxBreakdown {
  double jw = 0.0;              // water flux, m/s
  double pi_d_bulk = 0.0;       // Pa
  double pi_f_bulk = 0.0;       // Pa
  double pi_d_interface = 0.0;  // Pa
  double pi_f_membrane = 0.0;   // Pa
  double S = 0.0;               // structural parameter, m
  double k_feed = 0.0;          // feed-side mass-transfer coefficient, m/s
  double residual = 0.0;        // |F(jw)| at the returned flux, m/s
  int iterations = 0;
  bool zero_driving_force = false;
};

/// S = tau * t_psl / eps_psl, the effective ICP diffusion length.
double structural_parameter(double t_psl, double tau, double eps_psl);

/// Solution properties at concentration c (mol/L). With no polynomial
/// correlations configured: van 't Hoff osmotic pressure Pi = i*c*R*T
/// (c converted to mol/m^3) and reference-water density/viscosity/diffusivity.
FluidProperties fluid_properties(double c, const PhysicsConfig& cfg);

/// Boundary-layer mass transfer in a parallel-plate channel, d_h = 2*t_c.
/// Laminar branch uses the Leveque correlation Sh = 1.85*(Re*Sc*d_h/L)^(1/3),
/// turbulent branch Sh = 0.04*Re^0.75*Sc^0.33; auto_by_re switches at Re = 2100.
HydroState mass_transfer_coefficient(double u, double L_x, double t_c,
                                     const FluidProperties& props, const PhysicsConfig& cfg);

/// Residual F(jw) = jw - A*[(Pi_Db*exp(-jw*S/D) - Pi_Fb*exp(jw/k)) /
/// (1 + (B/jw)*(exp(jw/k) - exp(-jw*S/D)))] of the implicit flux equation.
/// Requires jw_trial > 0; the B/jw term is singular at zero.
double flux_residual(double jw_trial, const OperatingPoint& point, const PhysicsConfig& cfg);

/// Solves F(jw) = 0 by Brent's method on [1e-12, 1.01*A*Pi_Db] and fills in the
/// interface osmotic pressures at the solution. Nonpositive bulk driving force
/// (or A = 0) short-circuits to the analytic zero-flux state.
PhysicalFluxBreakdown solve_physical_flux(const OperatingPoint& point, const PhysicsConfig& cfg);

}  // namespace foflux
