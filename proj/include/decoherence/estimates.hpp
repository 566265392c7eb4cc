#pragma once

// Order-of-magnitude estimators in SI units: relaxation versus decoherence
// timescales, tabulated localization times and visibility versus gas pressure.

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace decoherence {

namespace si {
inline constexpr double hbar = 1.054571817e-34;  // J s
inline constexpr double k_B = 1.380649e-23;      // J / K
inline constexpr double c = 299792458.0;         // m / s
inline constexpr double amu = 1.66053906660e-27; // kg
}  // namespace si

struct TimescaleReport {
  double lambda_dB;  // m
  double ratio;      // tau_r / tau_d
  double tau_r;      // s, NaN unless a relaxation rate was given
  double tau_d;      // s, NaN unless a relaxation rate was given
};

/// lambda_dB = hbar / sqrt(2 m k_B T) and tau_r / tau_d = (dx / lambda_dB)^2.
/// With a relaxation rate gamma (1/s), tau_r = 1/gamma and tau_d = tau_r / ratio.
inline TimescaleReport timescale_ratio(double mass_kg, double temperature_K, double dx_m,
                                       std::optional<double> relaxation_rate = std::nullopt) {
  if (!(mass_kg > 0.0) || !(temperature_K > 0.0) || !(dx_m > 0.0)) {
    throw std::invalid_argument("timescale_ratio: mass, temperature and separation must be positive");
  }
  TimescaleReport r;
  r.lambda_dB = si::hbar / std::sqrt(2.0 * mass_kg * si::k_B * temperature_K);
  const double q = dx_m / r.lambda_dB;
  r.ratio = q * q;
  r.tau_r = r.tau_d = std::numeric_limits<double>::quiet_NaN();
  if (relaxation_rate) {
    if (!(*relaxation_rate > 0.0)) throw std::invalid_argument("timescale_ratio: relaxation rate must be positive");
    r.tau_r = 1.0 / *relaxation_rate;
    r.tau_d = r.tau_r / r.ratio;
  }
  return r;
}

/// One environment/object entry: tau_d = 1 / (Lambda dx^2) in the
/// long-wavelength regime or 1 / Gamma_tot in the short-wavelength regime.
struct Table1Entry {
  std::string environment;
  std::string object;
  double dx_cm = 0.0;
  std::optional<double> lambda_cm2_s;  // scattering constant, 1/(cm^2 s)
  std::optional<double> gamma_tot_s;   // total scattering rate, 1/s
  double reference_s = std::numeric_limits<double>::quiet_NaN();  // tabulated order of magnitude
};

struct Table1Row {
  std::string environment;
  std::string object;
  double dx_cm;
  double tau_d_s;
  double reference_s;
  std::string regime;  // "long-wavelength" or "short-wavelength"
};

/// The four environments and two object sizes of the classic estimate table
/// with the tabulated times for display. Scattering constants are left empty:
/// they must come from configuration.
inline std::vector<Table1Entry> table1_template() {
  struct Ref {
    const char* env;
    double dust, molecule;
  };
  const Ref refs[] = {{"cosmic background radiation", 1.0, 1e24},
                      {"photons at room temperature", 1e-18, 1e6},
                      {"best laboratory vacuum", 1e-14, 1e-2},
                      {"air at normal pressure", 1e-31, 1e-19}};
  std::vector<Table1Entry> out;
  for (const auto& r : refs) {
    out.push_back({r.env, "dust grain", 1e-3, std::nullopt, std::nullopt, r.dust});
    out.push_back({r.env, "large molecule", 1e-6, std::nullopt, std::nullopt, r.molecule});
  }
  return out;
}

inline std::vector<Table1Row> table1_scenarios(const std::vector<Table1Entry>& entries) {
  std::vector<Table1Row> rows;
  for (const auto& e : entries) {
    if (!(e.dx_cm > 0.0)) throw std::invalid_argument("table1: dx must be positive for " + e.environment);
    if (e.lambda_cm2_s && e.gamma_tot_s) {
      throw std::invalid_argument("table1: give either lambda or gamma_tot for " + e.environment + " / " + e.object);
    }
    if (e.lambda_cm2_s) {
      if (!(*e.lambda_cm2_s > 0.0)) throw std::invalid_argument("table1: lambda must be positive");
      rows.push_back({e.environment, e.object, e.dx_cm, 1.0 / (*e.lambda_cm2_s * e.dx_cm * e.dx_cm), e.reference_s,
                      "long-wavelength"});
    } else if (e.gamma_tot_s) {
      if (!(*e.gamma_tot_s > 0.0)) throw std::invalid_argument("table1: gamma_tot must be positive");
      rows.push_back({e.environment, e.object, e.dx_cm, 1.0 / *e.gamma_tot_s, e.reference_s, "short-wavelength"});
    } else {
      throw std::invalid_argument("table1: missing scattering constant for " + e.environment + " / " + e.object);
    }
  }
  return rows;
}

/// Long-wavelength scattering constant (1/(m^2 s)) of a sphere of radius a in
/// a Maxwell gas: Lambda = (8 / 3 hbar^2) n sqrt(2 pi m) (k_B T)^(3/2) a^2, i.e. the
/// q^2-weighted flux of the geometric cross-section pi a^2.
inline double gas_scattering_constant(double number_density_m3, double particle_mass_kg, double temperature_K,
                                      double radius_m) {
  return 8.0 / (3.0 * si::hbar * si::hbar) * number_density_m3 *
         std::sqrt(2.0 * std::numbers::pi * particle_mass_kg) * std::pow(si::k_B * temperature_K, 1.5) * radius_m * radius_m;
}

struct VisibilityPoint {
  double pressure;
  double visibility;
};

/// V(p) = V0 exp(-gamma_per_pressure * p * t_transit).
inline std::vector<VisibilityPoint> visibility_vs_pressure(double gamma_per_pressure, double t_transit,
                                                           const std::vector<double>& pressures, double v0 = 1.0) {
  if (!(gamma_per_pressure >= 0.0) || !(t_transit >= 0.0)) {
    throw std::invalid_argument("visibility_vs_pressure: rate and transit time must be nonnegative");
  }
  std::vector<VisibilityPoint> out;
  out.reserve(pressures.size());
  for (double p : pressures) {
    if (!(p >= 0.0)) throw std::invalid_argument("visibility_vs_pressure: negative pressure");
    out.push_back({p, v0 * std::exp(-gamma_per_pressure * p * t_transit)});
  }
  return out;
}

}  // namespace decoherence
