#pragma once

// Qubit coupled to N environment qubits:
//   H = -(1/2) Delta0 sx + (1/2) w0 sz + (1/2) sz (x) sum g_i sz^(i).
// H is block diagonal over environment basis states |b>, where it acts on the
// system as the 2x2 matrix H_b = -(1/2) Delta0 sx + (1/2)(w0 + E_b) sz with
// E_b = sum_i g_i (+-1).

#include "decoherence/core.hpp"

#include <array>

namespace decoherence {

inline constexpr std::size_t kMaxEnvironmentSpins = 14;

struct SpinEnvironment {
  RealVector couplings;                 // g_i
  std::vector<StateVector> env_states;  // one qubit state per environment spin
  double delta0 = 0.0;
  double omega0 = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(couplings.size()); }

  /// Every environment spin in |+>.
  static SpinEnvironment uniform(RealVector couplings, double delta0, double omega0 = 0.0) {
    std::vector<StateVector> env(static_cast<std::size_t>(couplings.size()), ket_plus());
    return {std::move(couplings), std::move(env), delta0, omega0};
  }

  void validate() const {
    if (size() > kMaxEnvironmentSpins) {
      throw std::invalid_argument("SpinEnvironment: at most " + std::to_string(kMaxEnvironmentSpins) +
                                  " environment spins are supported");
    }
    if (env_states.size() != size()) throw std::invalid_argument("SpinEnvironment: one state per spin required");
    for (const auto& s : env_states) {
      if (s.dim() != 2) throw std::invalid_argument("SpinEnvironment: environment states must be qubits");
    }
  }
};

namespace detail {

/// Amplitudes of the product environment state in the computational basis
/// (spin 1 is the most significant bit).
inline Vector environment_amplitudes(const SpinEnvironment& env) {
  Vector amps = Vector::Ones(1);
  for (const auto& s : env.env_states) amps = kron(amps, s.amplitudes());
  return amps;
}

/// E_b for every environment basis state b.
inline RealVector block_energies(const SpinEnvironment& env) {
  const std::size_t n = env.size();
  const std::size_t dim = std::size_t{1} << n;
  RealVector e(static_cast<Eigen::Index>(dim));
  for (std::size_t b = 0; b < dim; ++b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool one = (b >> (n - 1 - i)) & 1u;
      acc += (one ? -1.0 : 1.0) * env.couplings(static_cast<Eigen::Index>(i));
    }
    e(static_cast<Eigen::Index>(b)) = acc;
  }
  return e;
}

/// exp(-i t (a sx + c sz)) for real a, c.
inline Eigen::Matrix2cd qubit_propagator(double a, double c, double t) {
  const double w = std::hypot(a, c);
  Eigen::Matrix2cd u;
  if (w == 0.0) return Eigen::Matrix2cd::Identity();
  const double cs = std::cos(w * t), sn = std::sin(w * t) / w;
  u << Complex(cs, -c * sn), Complex(0.0, -a * sn), Complex(0.0, -a * sn), Complex(cs, c * sn);
  return u;
}

}  // namespace detail

/// Joint state at time t over (system, env_1, ..., env_N), system most significant.
inline StateVector spin_spin_state(const SpinEnvironment& env, const StateVector& psi_s, double t) {
  env.validate();
  if (psi_s.dim() != 2) throw std::invalid_argument("spin_spin_state: system must be a qubit");
  const Vector amps = detail::environment_amplitudes(env);
  const RealVector e = detail::block_energies(env);
  const Eigen::Index de = amps.size();
  Vector out(2 * de);
  const Eigen::Vector2cd s = psi_s.amplitudes();
  for (Eigen::Index b = 0; b < de; ++b) {
    const Eigen::Vector2cd phi = detail::qubit_propagator(-0.5 * env.delta0, 0.5 * (env.omega0 + e(b)), t) * s;
    out(b) = amps(b) * phi(0);
    out(de + b) = amps(b) * phi(1);
  }
  return StateVector::normalized(std::move(out), Dims(env.size() + 1, 2));
}

struct SpinSpinTrajectory {
  RealVector times;
  std::vector<Matrix> reduced;  // 2x2 system states
  /// |rho_01(t) / rho_01(0)|; filled only when Delta0 = 0 and rho_01(0) != 0.
  RealVector decoherence_factor;
};

/// Reduced system dynamics: sum_b |c_b|^2 U_b |psi><psi| U_b^dag, each 2x2 block
/// propagator evaluated in closed form from its eigen-decomposition.
inline SpinSpinTrajectory spin_spin_exact(const SpinEnvironment& env, const StateVector& psi_s, const RealVector& times) {
  env.validate();
  if (psi_s.dim() != 2) throw std::invalid_argument("spin_spin_exact: system must be a qubit");
  const Vector amps = detail::environment_amplitudes(env);
  const RealVector e = detail::block_energies(env);
  const Eigen::Vector2cd s = psi_s.amplitudes();
  SpinSpinTrajectory out{times, {}, RealVector()};
  const Complex c01 = s(0) * std::conj(s(1));
  const bool factor = env.delta0 == 0.0 && std::abs(c01) > 0.0;
  if (factor) out.decoherence_factor.resize(times.size());
  for (Eigen::Index k = 0; k < times.size(); ++k) {
    Eigen::Matrix2cd rho = Eigen::Matrix2cd::Zero();
    for (Eigen::Index b = 0; b < amps.size(); ++b) {
      const double w = std::norm(amps(b));
      if (w == 0.0) continue;
      const Eigen::Vector2cd phi = detail::qubit_propagator(-0.5 * env.delta0, 0.5 * (env.omega0 + e(b)), times(k)) * s;
      rho += w * phi * phi.adjoint();
    }
    out.reduced.push_back(rho);
    if (factor) out.decoherence_factor(k) = std::abs(rho(0, 1) / c01);
  }
  return out;
}

/// Dense total Hamiltonian on (system, env_1, ..., env_N).
inline Matrix spin_spin_hamiltonian(const SpinEnvironment& env) {
  env.validate();
  const Dims dims(env.size() + 1, 2);
  const auto d = static_cast<Eigen::Index>(detail::product(dims));
  Matrix e = Matrix::Zero(d, d);
  for (std::size_t i = 0; i < env.size(); ++i) e += env.couplings(static_cast<Eigen::Index>(i)) * embed(pauli::Z(), i + 1, dims);
  const Matrix sz = embed(pauli::Z(), 0, dims);
  return -0.5 * env.delta0 * embed(pauli::X(), 0, dims) + 0.5 * env.omega0 * sz + 0.5 * sz * e;
}

/// exp(-i H t) by dense diagonalization (small N only).
inline Matrix spin_spin_unitary(const SpinEnvironment& env, double t) {
  if (env.size() > 8) throw std::invalid_argument("spin_spin_unitary: dense propagator limited to N <= 8");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(spin_spin_hamiltonian(env));
  Vector phase(eig.eigenvalues().size());
  for (Eigen::Index i = 0; i < phase.size(); ++i) phase(i) = std::polar(1.0, -eig.eigenvalues()(i) * t);
  return eig.eigenvectors() * phase.asDiagonal() * eig.eigenvectors().adjoint();
}

/// Environment product state as a density matrix.
inline DensityMatrix spin_environment_state(const SpinEnvironment& env) {
  const Vector amps = detail::environment_amplitudes(env);
  return DensityMatrix(amps * amps.adjoint(), Dims(env.size(), 2));
}

}  // namespace decoherence
