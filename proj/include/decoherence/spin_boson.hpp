#pragma once

// Spin-boson model: exact pure dephasing for a discretized bath, a Fock-space
// dilation of small baths, and the weak-coupling Born-Markov generator.

#include "decoherence/bath.hpp"
#include "decoherence/lindblad.hpp"
#include "decoherence/qbm.hpp"

namespace decoherence {

/// H_B = sum w_i a_i^dag a_i, coupling sigma_z (x) sum g_i (a_i + a_i^dag).
struct BathModes {
  RealVector omega;
  RealVector coupling;
};

/// Modes at the Gauss-Legendre nodes of [0, omega_max] with g_i^2 = J(w_i) W_i,
/// so sum g_i^2 f(w_i) approximates int J f dw.
inline BathModes discretize_bath(const SpectralDensity& j, std::size_t n_osc, double omega_max) {
  if (n_osc == 0 || !(omega_max > 0.0)) throw std::invalid_argument("discretize_bath: invalid discretization");
  const QuadratureRule r = gauss_legendre(n_osc, 0.0, omega_max);
  BathModes m{r.nodes, RealVector(r.nodes.size())};
  for (Eigen::Index i = 0; i < r.nodes.size(); ++i) m.coupling(i) = std::sqrt(j(r.nodes(i)) * r.weights(i));
  return m;
}

/// ln |r(t)| for one mode: a thermal oscillator displaced by +-g/w depending on
/// the qubit state. -(4 g^2 / w^2)(1 - cos w t) coth(w / 2T).
inline double mode_log_coherence(double omega, double g, double temperature, double t) {
  const double c = temperature == 0.0 ? 1.0 : 1.0 / std::tanh(omega / (2.0 * temperature));
  return -4.0 * g * g / (omega * omega) * (1.0 - std::cos(omega * t)) * c;
}

/// |rho_01(t)| / |rho_01(0)| for a discretized bath, as the product of the exact
/// single-mode factors.
inline RealVector exact_dephasing(const BathModes& modes, double temperature, const RealVector& times) {
  detail::check_temperature(temperature);
  RealVector out(times.size());
  for (Eigen::Index k = 0; k < times.size(); ++k) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < modes.omega.size(); ++i) {
      acc += mode_log_coherence(modes.omega(i), modes.coupling(i), temperature, times(k));
    }
    out(k) = std::exp(acc);
  }
  return out;
}

struct DephasingConfig {
  std::size_t n_osc = 512;
  double omega_max_factor = 5.0;  // modes on [0, factor * Lambda]
  double tolerance = 0.02;        // allowed change when n_osc is doubled
};

struct DephasingResult {
  RealVector times;
  RealVector coherence;
  /// Largest change of the coherence when the mode count is doubled, relative
  /// to max(coherence, 1e-3).
  double discretization_change = 0.0;
};

inline DephasingResult spin_boson_exact_dephasing(const SpectralDensity& j, double temperature, const RealVector& times,
                                                  const DephasingConfig& cfg = {}) {
  const double w_max = cfg.omega_max_factor * j.scale();
  DephasingResult out{times, exact_dephasing(discretize_bath(j, cfg.n_osc, w_max), temperature, times), 0.0};
  const RealVector fine = exact_dephasing(discretize_bath(j, 2 * cfg.n_osc, w_max), temperature, times);
  for (Eigen::Index k = 0; k < times.size(); ++k) {
    out.discretization_change =
        std::max(out.discretization_change, std::abs(out.coherence(k) - fine(k)) / std::max(fine(k), 1e-3));
  }
  if (out.discretization_change > cfg.tolerance) {
    throw numerical_error("spin_boson_exact_dephasing: bath discretization not converged (change " +
                          std::to_string(out.discretization_change) + " on doubling n_osc)");
  }
  return out;
}

/// Thermal state of one truncated mode, renormalized.
inline Matrix truncated_thermal_state(double omega, double temperature, std::size_t levels) {
  const auto d = static_cast<Eigen::Index>(levels);
  Matrix rho = Matrix::Zero(d, d);
  if (temperature == 0.0) {
    rho(0, 0) = 1.0;
    return rho;
  }
  double z = 0.0;
  for (Eigen::Index n = 0; n < d; ++n) z += std::exp(-omega * static_cast<double>(n) / temperature);
  for (Eigen::Index n = 0; n < d; ++n) rho(n, n) = std::exp(-omega * static_cast<double>(n) / temperature) / z;
  return rho;
}

/// Total Hamiltonian (1/2) w0 sigma_z + sum w a^dag a + sigma_z (x) sum g (a + a^dag)
/// on qubit (x) mode_1 (x) ... with `levels` Fock states per mode.
inline Matrix spin_boson_hamiltonian(const BathModes& modes, double omega0, std::size_t levels) {
  const std::size_t n = static_cast<std::size_t>(modes.omega.size());
  Dims dims{2};
  for (std::size_t i = 0; i < n; ++i) dims.push_back(levels);
  const Matrix a = annihilation(levels);
  const Matrix num = a.adjoint() * a;
  const Matrix q = a + a.adjoint();
  Matrix h = 0.5 * omega0 * embed(pauli::Z(), 0, dims);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    h += modes.omega(ii) * embed(num, i + 1, dims);
    h += modes.coupling(ii) * embed(pauli::Z(), 0, dims) * embed(q, i + 1, dims);
  }
  return h;
}

/// Reduced qubit states from direct evolution of qubit plus truncated bath
/// (diagonalized once), starting from psi_S (x) thermal bath.
inline std::vector<Matrix> spin_boson_dilation(const BathModes& modes, double temperature, double omega0,
                                               const StateVector& psi_s, const RealVector& times, std::size_t levels) {
  if (psi_s.dim() != 2) throw std::invalid_argument("spin_boson_dilation: system must be a qubit");
  const std::size_t n = static_cast<std::size_t>(modes.omega.size());
  Dims dims{2};
  Matrix rho_env = Matrix::Identity(1, 1);
  for (std::size_t i = 0; i < n; ++i) {
    dims.push_back(levels);
    rho_env = kron(rho_env, truncated_thermal_state(modes.omega(static_cast<Eigen::Index>(i)), temperature, levels));
  }
  if (detail::product(dims) > 4096) throw std::invalid_argument("spin_boson_dilation: dilation too large");
  const Matrix rho0 = kron(Matrix(psi_s.amplitudes() * psi_s.amplitudes().adjoint()), rho_env);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(spin_boson_hamiltonian(modes, omega0, levels));
  const Matrix& v = eig.eigenvectors();
  const Matrix rho0_eig = v.adjoint() * rho0 * v;
  std::vector<Matrix> out;
  for (Eigen::Index k = 0; k < times.size(); ++k) {
    Vector phase(v.cols());
    for (Eigen::Index i = 0; i < phase.size(); ++i) phase(i) = std::polar(1.0, -eig.eigenvalues()(i) * times(k));
    const Matrix rho_t = v * (phase.asDiagonal() * rho0_eig * phase.conjugate().asDiagonal()) * v.adjoint();
    out.push_back(partial_trace(rho_t, dims, {0}));
  }
  return out;
}

/// Weak-coupling Born-Markov generator
///   d rho/dt = -i(H' rho - rho H'^dag) - D~[sz, [sz, rho]] + zeta sz rho sy + zeta^* sy rho sz,
/// zeta^* = f~ - i gamma~, H' = H_S - zeta^* sx, H_S = (1/2) w0 sz - (1/2) Delta0 sx.
/// H' is the non-Hermitian renormalized Hamiltonian: its Hermitian part shifts
/// the tunnelling term and its anti-Hermitian part balances the trace loss of
/// the zeta terms.
class SpinBosonBornMarkov {
 public:
  SpinBosonBornMarkov(double omega0, double delta0, const CoefficientSet& c)
      : dephasing_(c.dephasing), zeta_(c.decay_real, c.decay_imag) {
    const Matrix hs = 0.5 * omega0 * pauli::Z() - 0.5 * delta0 * pauli::X();
    h_eff_ = hs - std::conj(zeta_) * pauli::X();
  }

  const Matrix& effective_hamiltonian() const { return h_eff_; }
  Complex zeta() const { return zeta_; }

  Matrix operator()(const Matrix& rho) const {
    static const Matrix sz = pauli::Z(), sy = pauli::Y();
    Matrix out = -kI * (h_eff_ * rho - rho * h_eff_.adjoint());
    out -= dephasing_ * commutator(sz, commutator(sz, rho));
    out += zeta_ * sz * rho * sy + std::conj(zeta_) * sy * rho * sz;
    return out;
  }

 private:
  double dephasing_;
  Complex zeta_;
  Matrix h_eff_;
};

}  // namespace decoherence
