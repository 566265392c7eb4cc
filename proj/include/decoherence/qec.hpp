#pragma once

// Three-qubit phase-flip repetition code with ancilla-based syndrome
// extraction. Qubit layout of joint states: data 0..2, then any environment
// qubits; the syndrome routines append two ancillas after those.

#include "decoherence/core.hpp"
#include "decoherence/lindblad.hpp"
#include "decoherence/random.hpp"

#include <array>
#include <optional>

namespace decoherence {

inline constexpr std::size_t kCodeQubits = 3;

namespace detail {

/// Applies a single-qubit gate to qubit q of an n-qubit register (qubit 0 most significant).
inline void apply_1q(Vector& psi, std::size_t n, std::size_t q, const Eigen::Matrix2cd& g) {
  const std::size_t stride = std::size_t{1} << (n - 1 - q);
  const auto dim = static_cast<std::size_t>(psi.size());
  for (std::size_t i = 0; i < dim; ++i) {
    if (i & stride) continue;
    const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(i | stride);
    const Complex x = psi(a), y = psi(b);
    psi(a) = g(0, 0) * x + g(0, 1) * y;
    psi(b) = g(1, 0) * x + g(1, 1) * y;
  }
}

inline void apply_cnot(Vector& psi, std::size_t n, std::size_t control, std::size_t target) {
  const std::size_t cbit = std::size_t{1} << (n - 1 - control);
  const std::size_t tbit = std::size_t{1} << (n - 1 - target);
  const auto dim = static_cast<std::size_t>(psi.size());
  for (std::size_t i = 0; i < dim; ++i) {
    if ((i & cbit) && !(i & tbit)) std::swap(psi(static_cast<Eigen::Index>(i)), psi(static_cast<Eigen::Index>(i | tbit)));
  }
}

inline Eigen::Matrix2cd hadamard() {
  Eigen::Matrix2cd h;
  h << 1.0, 1.0, 1.0, -1.0;
  return h / std::sqrt(2.0);
}

inline Eigen::Matrix2cd z_gate() { return Eigen::Matrix2cd(pauli::Z()); }

inline std::size_t qubit_count(const StateVector& s, const char* what) {
  for (std::size_t d : s.dims()) {
    if (d != 2) throw std::invalid_argument(std::string(what) + ": every factor must be a qubit");
  }
  return s.dims().size();
}

}  // namespace detail

/// Logical |+> -> |+++>, |-> -> |--->, so |0> -> (|+++> + |--->)/sqrt2.
inline StateVector encode(const StateVector& psi) {
  if (psi.dim() != 2) throw std::invalid_argument("encode: input must be a single qubit");
  const Vector p = ket_plus().amplitudes(), m = ket_minus().amplitudes();
  const Complex a = p.dot(psi.amplitudes()), b = m.dot(psi.amplitudes());
  const Vector out = a * kron(kron(p, p), p) + b * kron(kron(m, m), m);
  return StateVector::normalized(out, Dims(kCodeQubits, 2));
}

enum class ErrorKind { independent_phase_flip, partial_decoherence };

struct ErrorModel {
  ErrorKind kind = ErrorKind::independent_phase_flip;
  std::size_t n_qubits = kCodeQubits;
  double p = 0.0;        // flip probability per qubit (independent)
  std::size_t k = 0;     // number of entangling qubits (partial)
  double theta = 0.0;    // environment rotation angle (partial)

  void validate() const {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("ErrorModel: p must lie in [0, 1]");
    if (k > n_qubits) throw std::invalid_argument("ErrorModel: K exceeds N");
    if (!std::isfinite(theta)) throw std::invalid_argument("ErrorModel: theta must be finite");
  }
};

/// Ground truth kept for tests only.
struct AppliedErrors {
  std::vector<bool> flipped;            // independent model: sigma_z applied to qubit i
  std::vector<std::size_t> entangled;  // partial model: qubits coupled to a private environment qubit
};

struct ErrorResult {
  StateVector state;  // data qubits followed by one environment qubit per entangled data qubit
  AppliedErrors record;
};

/// Independent model: sigma_z on each qubit with probability p. Partial model:
/// the first K qubits each control a private environment qubit, rotating it
/// from |0> to cos(theta)|0> + sin(theta)|1> when the data qubit is |1>.
template <class Rng>
ErrorResult apply_errors(const StateVector& state, const ErrorModel& model, Rng& rng) {
  model.validate();
  const std::size_t n = detail::qubit_count(state, "apply_errors");
  if (n != model.n_qubits) throw std::invalid_argument("apply_errors: state size differs from ErrorModel::n_qubits");
  AppliedErrors rec;
  if (model.kind == ErrorKind::independent_phase_flip) {
    Vector psi = state.amplitudes();
    rec.flipped.assign(n, false);
    for (std::size_t q = 0; q < n; ++q) {
      if (rng.uniform() < model.p) {
        rec.flipped[q] = true;
        detail::apply_1q(psi, n, q, detail::z_gate());
      }
    }
    return {StateVector(psi, state.dims()), rec};
  }
  const std::size_t total = n + model.k;
  Vector psi = kron(state.amplitudes(), StateVector::basis(Dims(model.k, 2), 0).amplitudes());
  Eigen::Matrix2cd ry;
  ry << std::cos(model.theta), -std::sin(model.theta), std::sin(model.theta), std::cos(model.theta);
  for (std::size_t j = 0; j < model.k; ++j) {
    rec.entangled.push_back(j);
    const std::size_t cbit = std::size_t{1} << (total - 1 - j);
    const std::size_t tbit = std::size_t{1} << (total - 1 - (n + j));
    for (std::size_t i = 0; i < static_cast<std::size_t>(psi.size()); ++i) {
      if (!(i & cbit) || (i & tbit)) continue;
      const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(i | tbit);
      const Complex x = psi(a), y = psi(b);
      psi(a) = ry(0, 0) * x + ry(0, 1) * y;
      psi(b) = ry(1, 0) * x + ry(1, 1) * y;
    }
  }
  return {StateVector(psi, Dims(total, 2)), rec};
}

/// Unencoded reference: one qubit under the same model (K = 1 for partial).
template <class Rng>
ErrorResult apply_errors_bare(const StateVector& qubit, const ErrorModel& model, Rng& rng) {
  ErrorModel bare = model;
  bare.n_qubits = 1;
  bare.k = std::min<std::size_t>(model.k, 1);
  return apply_errors(qubit, bare, rng);
}

struct SyndromeOutcome {
  std::array<int, 2> bits{};  // ancilla readouts (X0X1, X1X2 parities)
  std::string label;
  double probability = 0.0;
  /// Normalized joint state (data, environment, ancillas) after the measurement.
  std::optional<StateVector> state;
};

struct RecoveryBranch {
  SyndromeOutcome outcome;
  std::optional<StateVector> corrected;  // joint state after the correction
  double fidelity = 0.0;                 // <psi_L| rho_data |psi_L>
};

struct RecoveryResult {
  std::vector<RecoveryBranch> branches;
  double fidelity = 0.0;  // probability-weighted over branches
};

/// Data qubit to correct for a syndrome, or -1 for none.
inline int correction_for(const std::array<int, 2>& s) {
  if (s[0] == 1 && s[1] == 0) return 0;
  if (s[0] == 1 && s[1] == 1) return 1;
  if (s[0] == 0 && s[1] == 1) return 2;
  return -1;
}

namespace detail {

/// Appends ancillas |00> and runs the parity circuit: H on data, CNOTs
/// d0,d1 -> a0 and d1,d2 -> a1, H on data.
inline Vector entangle_ancillas(const StateVector& data_env, std::size_t& n_total) {
  const std::size_t n = qubit_count(data_env, "syndrome");
  if (n < kCodeQubits) throw std::invalid_argument("syndrome: need the three code qubits");
  n_total = n + 2;
  Vector psi = kron(data_env.amplitudes(), StateVector::basis({4}, 0).amplitudes());
  const std::size_t a0 = n, a1 = n + 1;
  for (std::size_t q = 0; q < kCodeQubits; ++q) apply_1q(psi, n_total, q, hadamard());
  apply_cnot(psi, n_total, 0, a0);
  apply_cnot(psi, n_total, 1, a0);
  apply_cnot(psi, n_total, 1, a1);
  apply_cnot(psi, n_total, 2, a1);
  for (std::size_t q = 0; q < kCodeQubits; ++q) apply_1q(psi, n_total, q, hadamard());
  return psi;
}

/// Unnormalized projection of the ancillas (last two qubits) onto outcome s.
inline Vector project_ancillas(const Vector& psi, int s) {
  Vector out = Vector::Zero(psi.size());
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    if ((i & 3) == s) out(i) = psi(i);
  }
  return out;
}

inline RecoveryBranch recover_branch(const Vector& projected, double prob, int s, std::size_t n_total,
                                     const StateVector& target) {
  RecoveryBranch br;
  br.outcome.bits = {(s >> 1) & 1, s & 1};
  br.outcome.label = std::to_string(br.outcome.bits[0]) + std::to_string(br.outcome.bits[1]);
  br.outcome.probability = prob;
  if (prob <= 0.0) return br;
  Vector psi = projected / std::sqrt(prob);
  const Dims dims(n_total, 2);
  br.outcome.state = StateVector::normalized(psi, dims);
  const int q = correction_for(br.outcome.bits);
  if (q >= 0) apply_1q(psi, n_total, static_cast<std::size_t>(q), z_gate());
  br.corrected = StateVector::normalized(psi, dims);
  const Matrix rho = reduce_pure(br.corrected->amplitudes(), dims, {0, 1, 2});
  br.fidelity = fidelity(target, rho);
  return br;
}

}  // namespace detail

/// Probabilities of the four syndromes 00, 01, 10, 11.
inline std::array<double, 4> syndrome_distribution(const StateVector& data_env) {
  std::size_t n_total = 0;
  const Vector psi = detail::entangle_ancillas(data_env, n_total);
  std::array<double, 4> p{};
  for (Eigen::Index i = 0; i < psi.size(); ++i) p[static_cast<std::size_t>(i & 3)] += std::norm(psi(i));
  return p;
}

/// Exhaustive-branch mode: every syndrome with its exact probability, the
/// corrected state and its fidelity with the encoded logical state.
inline RecoveryResult syndrome_and_recover(const StateVector& data_env, const StateVector& logical) {
  const StateVector target = encode(logical);
  std::size_t n_total = 0;
  const Vector psi = detail::entangle_ancillas(data_env, n_total);
  RecoveryResult r;
  for (int s = 0; s < 4; ++s) {
    const Vector proj = detail::project_ancillas(psi, s);
    auto br = detail::recover_branch(proj, proj.squaredNorm(), s, n_total, target);
    r.fidelity += br.outcome.probability * br.fidelity;
    r.branches.push_back(std::move(br));
  }
  return r;
}

/// Sampled mode: one measurement outcome drawn from the Born rule.
template <class Rng>
RecoveryBranch syndrome_and_recover_sampled(const StateVector& data_env, const StateVector& logical, Rng& rng) {
  const StateVector target = encode(logical);
  std::size_t n_total = 0;
  const Vector psi = detail::entangle_ancillas(data_env, n_total);
  const double u = rng.uniform();
  double acc = 0.0;
  int chosen = 3;
  std::array<Vector, 4> proj;
  std::array<double, 4> prob{};
  for (int s = 0; s < 4; ++s) {
    proj[s] = detail::project_ancillas(psi, s);
    prob[s] = proj[s].squaredNorm();
  }
  for (int s = 0; s < 4; ++s) {
    acc += prob[s];
    if (u < acc && prob[s] > 0.0) {
      chosen = s;
      break;
    }
  }
  while (prob[chosen] <= 0.0 && chosen > 0) --chosen;  // rounding at the top end
  return detail::recover_branch(proj[chosen], prob[chosen], chosen, n_total, target);
}

/// Pauli components of U on (qubit, environment) for environment start e0:
/// U |psi>|e0> = sum_s sigma_s |psi> |e_s> with |e_s> = A_s |e0> and
/// A_s = Tr_S[(sigma_s (x) I) U] / 2.
struct PauliExpansion {
  Vector e_i, e_x, e_y, e_z;

  Vector reconstruct(const StateVector& psi) const {
    const Vector p = psi.amplitudes();
    return kron(p, e_i) + kron(Vector(pauli::X() * p), e_x) + kron(Vector(pauli::Y() * p), e_y) +
           kron(Vector(pauli::Z() * p), e_z);
  }
};

inline PauliExpansion expand_in_pauli_errors(const Matrix& u, const StateVector& e0) {
  const auto de = static_cast<Eigen::Index>(e0.dim());
  if (u.rows() != 2 * de || u.cols() != 2 * de) throw std::invalid_argument("expand_in_pauli_errors: dimension mismatch");
  auto component = [&](const Matrix& s) {
    Matrix a = Matrix::Zero(de, de);
    for (Eigen::Index i = 0; i < 2; ++i) {
      for (Eigen::Index j = 0; j < 2; ++j) {
        if (s(j, i) != 0.0) a += s(j, i) * u.block(i * de, j * de, de, de);
      }
    }
    return Vector(0.5 * a * e0.amplitudes());
  };
  return {component(pauli::I()), component(pauli::X()), component(pauli::Y()), component(pauli::Z())};
}

/// Overload matching the state-level call; psi is used only to check dimensions.
inline PauliExpansion expand_in_pauli_errors(const Matrix& u, const StateVector& psi, const StateVector& e0) {
  if (psi.dim() != 2) throw std::invalid_argument("expand_in_pauli_errors: system must be a qubit");
  return expand_in_pauli_errors(u, e0);
}

struct LogicalErrorRate {
  double p = 0.0;
  double uncorrected = 0.0;  // bare qubit in |+> under the same flips
  double corrected = 0.0;    // encoded |+>_L after recovery
  std::size_t shots = 0;
};

/// Monte Carlo under independent phase flips. Shot i draws from
/// SplitMix64::stream(seed, i); a shot fails when the recovered fidelity is
/// below 1/2. Counts are integers, so the result does not depend on `workers`.
inline LogicalErrorRate monte_carlo_logical_error(double p, std::size_t shots, std::uint64_t seed,
                                                  std::size_t workers = 1) {
  if (shots == 0) throw std::invalid_argument("monte_carlo_logical_error: shots must be positive");
  ErrorModel model;
  model.p = p;
  model.validate();
  const StateVector logical = ket_plus();  // |+++>, flipped to |---> by a logical error
  const StateVector code = encode(logical);
  constexpr std::size_t kBlock = 1024;
  const std::size_t n_blocks = (shots + kBlock - 1) / kBlock;
  std::vector<std::size_t> bare_fail(n_blocks, 0), code_fail(n_blocks, 0);
  parallel_for(n_blocks, workers, [&](std::size_t b) {
    const std::size_t end = std::min(shots, (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) {
      SplitMix64 rng = SplitMix64::stream(seed, i);
      const ErrorResult err = apply_errors(code, model, rng);
      const RecoveryBranch br = syndrome_and_recover_sampled(err.state, logical, rng);
      if (br.fidelity < 0.5) ++code_fail[b];
      SplitMix64 bare_rng = SplitMix64::stream(seed ^ 0xB5AD4ECEDA1CE2A9ULL, i);
      const ErrorResult bare = apply_errors_bare(ket_plus(), model, bare_rng);
      if (std::norm(overlap(ket_plus(), bare.state)) < 0.5) ++bare_fail[b];
    }
  });
  LogicalErrorRate r;
  r.p = p;
  r.shots = shots;
  const auto n = static_cast<double>(shots);
  r.corrected = static_cast<double>(std::accumulate(code_fail.begin(), code_fail.end(), std::size_t{0})) / n;
  r.uncorrected = static_cast<double>(std::accumulate(bare_fail.begin(), bare_fail.end(), std::size_t{0})) / n;
  return r;
}

/// Leading-order corrected rate 3p^2(1 - p) + p^3.
inline double logical_error_oracle(double p) { return 3.0 * p * p * (1.0 - p) + p * p * p; }

}  // namespace decoherence
