#pragma once

// Harmonic-bath spectral densities, noise and dissipation kernels, and the
// Born-Markov coefficient integrals built from them.

#include "decoherence/core.hpp"
#include "decoherence/quadrature.hpp"

#include <numbers>

namespace decoherence {

class SpectralDensity {
 public:
  enum class Kind { ohmic, sampled };

  /// J(w) = (2 M gamma0 / pi) w Lambda^2 / (Lambda^2 + w^2).
  static SpectralDensity ohmic(double mass, double gamma0, double cutoff) {
    if (!(mass > 0.0)) throw std::invalid_argument("SpectralDensity: mass must be positive");
    if (!(gamma0 >= 0.0)) throw std::invalid_argument("SpectralDensity: gamma0 must be nonnegative");
    if (!(cutoff > 0.0) || !std::isfinite(cutoff)) {
      throw std::invalid_argument("SpectralDensity: a finite positive cutoff is required (kernels diverge without one)");
    }
    SpectralDensity j;
    j.kind_ = Kind::ohmic;
    j.mass_ = mass;
    j.gamma0_ = gamma0;
    j.cutoff_ = cutoff;
    return j;
  }

  /// Piecewise-linear J on an ascending grid starting at 0; zero beyond the
  /// last sample.
  static SpectralDensity sampled(RealVector omega, RealVector values, double mass = 1.0) {
    if (omega.size() < 2 || omega.size() != values.size()) {
      throw std::invalid_argument("SpectralDensity: sampled grid needs >= 2 matching points");
    }
    if (omega(0) != 0.0) throw std::invalid_argument("SpectralDensity: sampled grid must start at omega = 0");
    for (Eigen::Index i = 1; i < omega.size(); ++i) {
      if (!(omega(i) > omega(i - 1))) throw std::invalid_argument("SpectralDensity: grid must increase");
    }
    if ((values.array() < 0.0).any() || !values.allFinite()) {
      throw std::invalid_argument("SpectralDensity: J must be finite and nonnegative");
    }
    if (!(mass > 0.0)) throw std::invalid_argument("SpectralDensity: mass must be positive");
    SpectralDensity j;
    j.kind_ = Kind::sampled;
    j.mass_ = mass;
    j.omega_ = std::move(omega);
    j.values_ = std::move(values);
    return j;
  }

  Kind kind() const { return kind_; }
  double mass() const { return mass_; }
  double gamma0() const { return gamma0_; }

  /// Characteristic frequency: Lambda for ohmic, a tenth of the sampled range
  /// otherwise (so both map onto the same default windows).
  double scale() const { return kind_ == Kind::ohmic ? cutoff_ : omega_(omega_.size() - 1) / 10.0; }

  /// Upper end of frequency integrals.
  double support(double omega_max_factor) const {
    return kind_ == Kind::ohmic ? omega_max_factor * cutoff_ : omega_(omega_.size() - 1);
  }

  double operator()(double w) const {
    if (w < 0.0) throw std::invalid_argument("SpectralDensity: negative frequency");
    if (kind_ == Kind::ohmic) {
      return 2.0 * mass_ * gamma0_ / std::numbers::pi * w * cutoff_ * cutoff_ / (cutoff_ * cutoff_ + w * w);
    }
    const Eigen::Index n = omega_.size();
    if (w >= omega_(n - 1)) return w == omega_(n - 1) ? values_(n - 1) : 0.0;
    const auto it = std::upper_bound(omega_.data(), omega_.data() + n, w);
    const Eigen::Index hi = it - omega_.data();
    const double f = (w - omega_(hi - 1)) / (omega_(hi) - omega_(hi - 1));
    return (1.0 - f) * values_(hi - 1) + f * values_(hi);
  }

  /// lim_{w -> 0} J(w) / w, which sets J coth(w / 2T) at w = 0.
  double low_frequency_slope() const {
    if (kind_ == Kind::ohmic) return 2.0 * mass_ * gamma0_ / std::numbers::pi;
    return values_(1) / omega_(1);
  }

 private:
  Kind kind_ = Kind::ohmic;
  double mass_ = 1.0, gamma0_ = 0.0, cutoff_ = 1.0;
  RealVector omega_, values_;
};

/// J(w) coth(w / 2T), with the w -> 0 limit 2 T J'(0) and coth -> 1 at T = 0.
inline double thermal_weight(const SpectralDensity& j, double w, double temperature) {
  if (temperature == 0.0) return j(w);
  if (w == 0.0) return 2.0 * temperature * j.low_frequency_slope();
  return j(w) / std::tanh(w / (2.0 * temperature));
}

struct QuadratureConfig {
  double omega_max_factor = 10.0;  // frequency integrals on [0, factor * Lambda]
  std::size_t omega_points = 4096;
  double t_max_factor = 50.0;  // time integrals on [0, factor / Lambda]
  std::size_t tau_points = 8192;
  double tolerance = 1e-6;  // convergence residual of the coefficient integrals

  QuadratureConfig refined() const {
    QuadratureConfig q = *this;
    q.omega_points = 2 * omega_points;
    q.tau_points = 2 * tau_points;
    return q;
  }
};

struct BathKernels {
  RealVector tau;
  RealVector nu;
  RealVector eta;
};

namespace detail {

inline void check_temperature(double temperature) {
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
    throw std::invalid_argument("temperature must be finite and nonnegative");
  }
}

/// sum_j w_j f_j cos(w_j tau) and sum_j w_j g_j sin(w_j tau) on a uniform
/// frequency grid, using a rotation recurrence reseeded every 64 points.
inline void cos_sin_sums(const RealVector& fw, const RealVector& gw, double h, double tau, double& c, double& s) {
  const Complex step = std::polar(1.0, h * tau);
  Complex z = 1.0;
  c = s = 0.0;
  for (Eigen::Index j = 0; j < fw.size(); ++j) {
    if ((j & 63) == 0) z = std::polar(1.0, static_cast<double>(j) * h * tau);
    c += fw(j) * z.real();
    s += gw(j) * z.imag();
    z *= step;
  }
}

}  // namespace detail

/// nu(tau) = int J(w) coth(w/2T) cos(w tau) dw and eta(tau) = int J(w) sin(w tau) dw,
/// trapezoid on [0, support] with q.omega_points nodes.
inline BathKernels bath_kernels(const SpectralDensity& j, double temperature, const RealVector& tau,
                                const QuadratureConfig& q = {}) {
  detail::check_temperature(temperature);
  if (q.omega_points < 2) throw std::invalid_argument("bath_kernels: need at least two frequency points");
  const double w_max = j.support(q.omega_max_factor);
  const double h = w_max / static_cast<double>(q.omega_points - 1);
  const RealVector weights = trapezoid_weights(q.omega_points, h);
  RealVector fw(weights.size()), gw(weights.size());
  for (Eigen::Index k = 0; k < weights.size(); ++k) {
    const double w = static_cast<double>(k) * h;
    fw(k) = weights(k) * thermal_weight(j, w, temperature);
    gw(k) = weights(k) * j(w);
  }
  BathKernels out{tau, RealVector(tau.size()), RealVector(tau.size())};
  for (Eigen::Index i = 0; i < tau.size(); ++i) detail::cos_sin_sums(fw, gw, h, tau(i), out.nu(i), out.eta(i));
  return out;
}

/// Uniform tau grid [0, t_max_factor / scale] used by the coefficient integrals.
inline RealVector coefficient_tau_grid(const SpectralDensity& j, const QuadratureConfig& q = {}) {
  if (q.tau_points < 16) throw std::invalid_argument("coefficient_tau_grid: too few points");
  return RealVector::LinSpaced(static_cast<Eigen::Index>(q.tau_points), 0.0, q.t_max_factor / j.scale());
}

struct TimeIntegral {
  double value;
  double residual;
};

namespace detail {

inline double hann_mean(const RealVector& running, Eigen::Index begin, Eigen::Index end) {
  const Eigen::Index m = end - begin;
  double num = 0.0, den = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k + 1) / static_cast<double>(m + 1));
    num += w * running(begin + k);
    den += w;
  }
  return num / den;
}

}  // namespace detail

/// int_0^inf kernel(tau) trig(freq tau) dtau. The running trapezoid integral
/// still oscillates at the end of a finite window, so the value is its
/// Hann-weighted mean over the last quarter of the window; the residual is the
/// relative change from the Hann mean over the quarter before.
inline TimeIntegral windowed_time_integral(const RealVector& tau, const RealVector& kernel, double freq, bool sine) {
  const Eigen::Index n = tau.size();
  if (n < 16 || kernel.size() != n) throw std::invalid_argument("windowed_time_integral: bad grid");
  const double h = tau(1) - tau(0);
  RealVector running(n);
  double acc = 0.0, abs_acc = 0.0, prev = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double arg = freq * tau(i);
    const double v = kernel(i) * (sine ? std::sin(arg) : std::cos(arg));
    if (i > 0) {
      acc += 0.5 * h * (prev + v);
      abs_acc += 0.5 * h * (std::abs(prev) + std::abs(v));
    }
    running(i) = acc;
    prev = v;
  }
  // Endpoint correction h^2/12 f'(0) removes the leading trapezoid error at tau = 0.
  auto f = [&](Eigen::Index i) { return kernel(i) * (sine ? std::sin(freq * tau(i)) : std::cos(freq * tau(i))); };
  const double slope0 = (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h);
  running.array() += h * h / 12.0 * slope0;
  running(0) = 0.0;
  const double last = detail::hann_mean(running, 3 * n / 4, n);
  const double before = detail::hann_mean(running, n / 2, 3 * n / 4);
  const double scale = std::max(std::abs(last), 1e-9 * abs_acc);
  const double residual = scale > 0.0 ? std::abs(last - before) / scale : 0.0;
  return {last, residual};
}

struct CoefficientSet {
  // quantum Brownian motion
  double shift = 0.0;                // Omega-tilde^2
  double damping = 0.0;              // gamma
  double normal_diffusion = 0.0;     // D
  double anomalous_diffusion = 0.0;  // f
  // spin-boson
  double dephasing = 0.0;   // D-tilde
  double decay_real = 0.0;  // f-tilde
  double decay_imag = 0.0;  // gamma-tilde
  /// Largest convergence residual among the integrals computed.
  double residual = 0.0;
};

namespace detail {

inline double converged(const TimeIntegral& ti, double tol, const char* name, double& worst) {
  worst = std::max(worst, ti.residual);
  if (!(ti.residual <= tol)) {
    throw numerical_error(std::string("coefficient integral for ") + name + " did not converge (residual " +
                          std::to_string(ti.residual) + ")");
  }
  return ti.value;
}

}  // namespace detail

/// Omega-tilde^2 = -(2/M) int eta cos, gamma = (1/M Omega) int eta sin,
/// D = int nu cos, f = -(1/M Omega) int nu sin.
inline CoefficientSet qbm_coefficients(const SpectralDensity& j, double temperature, double omega,
                                       const QuadratureConfig& q = {}) {
  if (!(omega > 0.0)) throw std::invalid_argument("qbm_coefficients: Omega must be positive");
  const RealVector tau = coefficient_tau_grid(j, q);
  const BathKernels k = bath_kernels(j, temperature, tau, q);
  const double m = j.mass();
  CoefficientSet c;
  c.shift = -2.0 / m * detail::converged(windowed_time_integral(tau, k.eta, omega, false), q.tolerance, "shift", c.residual);
  c.damping = detail::converged(windowed_time_integral(tau, k.eta, omega, true), q.tolerance, "gamma", c.residual) / (m * omega);
  c.normal_diffusion = detail::converged(windowed_time_integral(tau, k.nu, omega, false), q.tolerance, "D", c.residual);
  c.anomalous_diffusion =
      -detail::converged(windowed_time_integral(tau, k.nu, omega, true), q.tolerance, "f", c.residual) / (m * omega);
  return c;
}

/// D-tilde = int nu cos(Delta0 tau), f-tilde = int nu sin, gamma-tilde = int eta sin.
inline CoefficientSet spin_boson_coefficients(const SpectralDensity& j, double temperature, double delta0,
                                              const QuadratureConfig& q = {}) {
  if (!(delta0 >= 0.0)) throw std::invalid_argument("spin_boson_coefficients: Delta0 must be nonnegative");
  const RealVector tau = coefficient_tau_grid(j, q);
  const BathKernels k = bath_kernels(j, temperature, tau, q);
  CoefficientSet c;
  c.dephasing = detail::converged(windowed_time_integral(tau, k.nu, delta0, false), q.tolerance, "D-tilde", c.residual);
  c.decay_real = detail::converged(windowed_time_integral(tau, k.nu, delta0, true), q.tolerance, "f-tilde", c.residual);
  c.decay_imag = detail::converged(windowed_time_integral(tau, k.eta, delta0, true), q.tolerance, "gamma-tilde", c.residual);
  return c;
}

/// J_eff(w, T) = J(w) tanh(w / 2T), sampled on the frequency quadrature grid.
inline SpectralDensity effective_spectral_density(const SpectralDensity& j, double temperature,
                                                  const QuadratureConfig& q = {}) {
  detail::check_temperature(temperature);
  const auto n = static_cast<Eigen::Index>(q.omega_points);
  const RealVector w = RealVector::LinSpaced(n, 0.0, j.support(q.omega_max_factor));
  RealVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v(i) = temperature == 0.0 ? j(w(i)) : j(w(i)) * std::tanh(w(i) / (2.0 * temperature));
  }
  return SpectralDensity::sampled(w, v, j.mass());
}

}  // namespace decoherence
