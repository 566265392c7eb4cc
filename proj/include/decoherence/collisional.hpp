#pragma once

// Collisional decoherence without recoil: the localization rate F(dx), its
// short- and long-wavelength limits, and the pointwise evolution of rho(x, x').

#include "decoherence/grid.hpp"
#include "decoherence/quadrature.hpp"

#include <functional>
#include <map>
#include <numbers>

namespace decoherence {

enum class ScatteringRegime { full, short_wavelength, long_wavelength };

/// Environment of scatterers with isotropic differential cross-section.
/// q is the wave number (momentum with hbar = 1).
struct ScatteringModel {
  std::function<double(double)> density;        // rho(q), number density per unit q
  std::function<double(double)> speed;          // v(q)
  std::function<double(double)> cross_section;  // |f(q)|^2 per steradian, angle independent
  double q_max = 0.0;                            // integrals run over [0, q_max]
  ScatteringRegime regime = ScatteringRegime::full;
  std::size_t q_nodes = 128;      // starting Gauss-Legendre order, doubled until converged
  double q_tolerance = 1e-8;      // relative change accepted between doublings

  /// Maxwell gas of particles with mass m at temperature T, number density n
  /// and total cross-section sigma_tot (hbar = k_B = 1).
  static ScatteringModel thermal_gas(double number_density, double particle_mass, double temperature,
                                     double sigma_tot) {
    if (!(number_density >= 0.0) || !(particle_mass > 0.0) || !(temperature > 0.0) || !(sigma_tot >= 0.0)) {
      throw std::invalid_argument("thermal_gas: invalid parameters");
    }
    const double two_mt = 2.0 * particle_mass * temperature;
    const double norm = number_density * 4.0 * std::numbers::pi * std::pow(std::numbers::pi * two_mt, -1.5);
    ScatteringModel m;
    m.density = [=](double q) { return norm * q * q * std::exp(-q * q / two_mt); };
    m.speed = [=](double q) { return q / particle_mass; };
    m.cross_section = [=](double) { return sigma_tot / (4.0 * std::numbers::pi); };
    m.q_max = 8.0 * std::sqrt(two_mt);
    return m;
  }

  void validate() const {
    if (!density || !speed || !cross_section) throw std::invalid_argument("ScatteringModel: missing function");
    if (!(q_max > 0.0)) throw std::invalid_argument("ScatteringModel: q_max must be positive");
    if (q_nodes < 2) throw std::invalid_argument("ScatteringModel: q_nodes must be at least 2");
  }
};

namespace detail {

/// Cache of Gauss-Legendre rules on [-1, 1] with power-of-two orders.
class RuleCache {
 public:
  const QuadratureRule& at_least(std::size_t n) {
    std::size_t order = 16;
    while (order < n) order *= 2;
    auto it = rules_.find(order);
    if (it == rules_.end()) it = rules_.emplace(order, gauss_legendre(order)).first;
    return it->second;
  }

 private:
  std::map<std::size_t, QuadratureRule> rules_;
};

/// (1/4pi) int dn dn' (1 - exp(i q (n - n').dx)) for the unit isotropic kernel,
/// by Gauss-Legendre in (cos theta, cos theta') with the azimuths integrated out:
/// (2pi)^2 / 4pi * [(sum w)^2 - |sum w exp(i a c)|^2], a = q dx.
inline double angular_factor(double a, RuleCache& cache) {
  const QuadratureRule& r = cache.at_least(static_cast<std::size_t>(std::ceil(0.6 * std::abs(a))) + 24);
  Complex s = 0.0;
  double total = 0.0;
  for (Eigen::Index k = 0; k < r.nodes.size(); ++k) {
    s += r.weights(k) * std::polar(1.0, a * r.nodes(k));
    total += r.weights(k);
  }
  return std::numbers::pi * (total * total - std::norm(s));
}

template <class Integrand>
double converged_q_integral(const ScatteringModel& m, Integrand&& f, std::size_t min_nodes, const char* what) {
  double prev = 0.0;
  bool have_prev = false;
  for (std::size_t n = std::max(m.q_nodes, min_nodes); n <= (std::size_t{1} << 14); n *= 2) {
    const QuadratureRule r = gauss_legendre(n, 0.0, m.q_max);
    double acc = 0.0;
    for (Eigen::Index k = 0; k < r.nodes.size(); ++k) acc += r.weights(k) * f(r.nodes(k));
    if (have_prev && std::abs(acc - prev) <= m.q_tolerance * std::max(std::abs(acc), 1e-300)) return acc;
    if (have_prev && acc == 0.0 && prev == 0.0) return 0.0;
    prev = acc;
    have_prev = true;
  }
  throw numerical_error(std::string(what) + ": q integral did not converge");
}

}  // namespace detail

struct DecoherenceRates {
  double gamma_tot = 0.0;  // total scattering rate
  double lambda = 0.0;     // scattering constant, F ~ lambda dx^2 at small dx
};

/// Gamma_tot = int dq rho v sigma_tot with sigma_tot = 4 pi |f|^2, and
/// Lambda = int dq rho v sigma_tot q^2 / 3.
inline DecoherenceRates decoherence_rates(const ScatteringModel& m) {
  m.validate();
  auto flux = [&m](double q) { return m.density(q) * m.speed(q) * 4.0 * std::numbers::pi * m.cross_section(q); };
  DecoherenceRates r;
  r.gamma_tot = detail::converged_q_integral(m, flux, 0, "total scattering rate");
  r.lambda = detail::converged_q_integral(m, [&](double q) { return flux(q) * q * q / 3.0; }, 0, "scattering constant");
  return r;
}

/// F(dx) from the full q and solid-angle integrals.
inline double localization_rate_full(const ScatteringModel& m, double dx) {
  m.validate();
  if (!(dx >= 0.0)) throw std::invalid_argument("localization_rate: dx must be nonnegative");
  if (dx == 0.0) return 0.0;
  detail::RuleCache cache;
  auto integrand = [&](double q) {
    return m.density(q) * m.speed(q) * m.cross_section(q) * detail::angular_factor(q * dx, cache);
  };
  // resolve oscillations of period ~ pi / dx in q
  const auto min_nodes = static_cast<std::size_t>(std::ceil(m.q_max * dx / std::numbers::pi * 4.0));
  return detail::converged_q_integral(m, integrand, min_nodes, "localization rate");
}

/// F(dx) according to the model's regime: the full integral, Gamma_tot for any
/// dx > 0, or Lambda dx^2.
inline double localization_rate(const ScatteringModel& m, double dx) {
  if (!(dx >= 0.0)) throw std::invalid_argument("localization_rate: dx must be nonnegative");
  switch (m.regime) {
    case ScatteringRegime::short_wavelength:
      return dx == 0.0 ? 0.0 : decoherence_rates(m).gamma_tot;
    case ScatteringRegime::long_wavelength:
      return decoherence_rates(m).lambda * dx * dx;
    case ScatteringRegime::full:
      break;
  }
  return localization_rate_full(m, dx);
}

/// rho(x, x', t) = rho(x, x', 0) exp(-F(|x - x'|) t) for any localization rate F.
inline GridState evolve_collisional(const GridState& state, const std::function<double(double)>& rate, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("evolve_collisional: t must be nonnegative");
  const Eigen::Index n = static_cast<Eigen::Index>(state.size());
  RealVector factor(n);
  for (Eigen::Index k = 0; k < n; ++k) factor(k) = k == 0 ? 1.0 : std::exp(-rate(static_cast<double>(k) * state.spacing()) * t);
  Matrix rho = state.rho();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i != j) rho(i, j) *= factor(std::abs(i - j));
    }
  }
  return GridState(state.x(), std::move(rho));
}

inline GridState evolve_collisional(const GridState& state, const ScatteringModel& m, double t) {
  if (m.regime == ScatteringRegime::full) {
    return evolve_collisional(state, [&m](double dx) { return localization_rate_full(m, dx); }, t);
  }
  const DecoherenceRates r = decoherence_rates(m);
  if (m.regime == ScatteringRegime::short_wavelength) {
    return evolve_collisional(state, [&r](double) { return r.gamma_tot; }, t);
  }
  return evolve_collisional(state, [&r](double dx) { return r.lambda * dx * dx; }, t);
}

/// Frobenius norm (with dx^2 measure) of the kernel restricted to x > xc, x' < xc:
/// the interference block of a two-packet superposition split at xc.
inline double interference_norm(const GridState& state, double xc = 0.0) {
  double acc = 0.0;
  const RealVector& x = state.x();
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (!(x(j) < xc)) continue;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x(i) > xc) acc += std::norm(state.rho()(i, j));
    }
  }
  return std::sqrt(acc) * state.spacing();
}

}  // namespace decoherence
