#include "decoherence/qec.hpp"
#include "decoherence/random.hpp"

#include <gtest/gtest.h>

using namespace decoherence;

namespace {

StateVector flip(const StateVector& s, std::size_t q) {
  Vector psi = s.amplitudes();
  detail::apply_1q(psi, s.dims().size(), q, detail::z_gate());
  return StateVector(psi, s.dims());
}

// Partial trace over the system qubit of (sigma (x) I) U, halved: the environment operator of each Pauli term.
Vector pauli_component_oracle(const Matrix& u, const Matrix& sigma, const Vector& e0) {
  const Eigen::Index de = e0.size();
  Matrix a = Matrix::Zero(de, de);
  const Matrix full = kron(sigma, Matrix::Identity(de, de)) * u;
  for (Eigen::Index i = 0; i < 2; ++i) a += full.block(i * de, i * de, de, de);
  return 0.5 * a * e0;
}

}  // namespace

TEST(Encode, CodeWords) {
  const Vector p = ket_plus().amplitudes(), m = ket_minus().amplitudes();
  const Vector ppp = kron(kron(p, p), p), mmm = kron(kron(m, m), m);
  EXPECT_LT((encode(ket0()).amplitudes() - (ppp + mmm) / std::sqrt(2.0)).norm(), 1e-14);
  EXPECT_LT((encode(ket_plus()).amplitudes() - ppp).norm(), 1e-14);
  SplitMix64 rng(1);
  const StateVector a = random_state({2}, rng);
  Vector perp(2);
  perp << -std::conj(a[1]), std::conj(a[0]);
  const StateVector b(perp, {2});
  EXPECT_LT(std::abs(overlap(encode(a), encode(b))), 1e-14);
  EXPECT_THROW(encode(encode(a)), std::invalid_argument);
}

TEST(ApplyErrors, Limits) {
  SplitMix64 rng(2);
  const StateVector code = encode(random_state({2}, rng));
  ErrorModel m;
  const auto none = apply_errors(code, m, rng);
  EXPECT_LT((none.state.amplitudes() - code.amplitudes()).norm(), 1e-15);
  m.p = 1.0;
  const auto all = apply_errors(code, m, rng);
  EXPECT_LT((all.state.amplitudes() - flip(flip(flip(code, 0), 1), 2).amplitudes()).norm(), 1e-14);
  EXPECT_EQ(all.record.flipped, (std::vector<bool>{true, true, true}));
  m.p = 1.5;
  EXPECT_THROW(apply_errors(code, m, rng), std::invalid_argument);
  m.p = 0.0;
  m.kind = ErrorKind::partial_decoherence;
  m.k = 4;
  EXPECT_THROW(apply_errors(code, m, rng), std::invalid_argument);
}

TEST(Syndrome, SingleFlipsCorrected) {
  SplitMix64 rng(3);
  const std::array<std::string, 3> expected = {"10", "11", "01"};
  for (int trial = 0; trial < 20; ++trial) {
    const StateVector logical = random_state({2}, rng);
    const StateVector code = encode(logical);
    const auto clean = syndrome_and_recover(code, logical);
    EXPECT_NEAR(clean.branches[0].outcome.probability, 1.0, 1e-12);
    EXPECT_NEAR(clean.fidelity, 1.0, 1e-10);
    for (std::size_t q = 0; q < 3; ++q) {
      const auto r = syndrome_and_recover(flip(code, q), logical);
      double total = 0.0;
      for (const auto& br : r.branches) {
        total += br.outcome.probability;
        if (br.outcome.label == expected[q]) {
          EXPECT_NEAR(br.outcome.probability, 1.0, 1e-12);
        }
      }
      EXPECT_NEAR(total, 1.0, 1e-10);
      EXPECT_NEAR(r.fidelity, 1.0, 1e-10);
      const auto sampled = syndrome_and_recover_sampled(flip(code, q), logical, rng);
      EXPECT_EQ(sampled.outcome.label, expected[q]);
      EXPECT_NEAR(sampled.fidelity, 1.0, 1e-10);
    }
  }
}

TEST(Syndrome, TwoFlipsMiscorrect) {
  const StateVector logical = ket_plus();
  const auto r = syndrome_and_recover(flip(flip(encode(logical), 0), 1), logical);
  EXPECT_LT(r.fidelity, 1e-10);
}

TEST(Syndrome, DistributionCarriesNoLogicalInformation) {
  SplitMix64 rng(4);
  ErrorModel partial;
  partial.kind = ErrorKind::partial_decoherence;
  partial.k = 2;
  partial.theta = 0.7;
  for (int trial = 0; trial < 20; ++trial) {
    const StateVector a = random_state({2}, rng), b = random_state({2}, rng);
    // coherent superposition of errors: data qubits entangled with an environment
    const auto ea = apply_errors(encode(a), partial, rng).state;
    const auto eb = apply_errors(encode(b), partial, rng).state;
    const auto pa = syndrome_distribution(ea), pb = syndrome_distribution(eb);
    double sum = 0.0;
    for (std::size_t s = 0; s < 4; ++s) {
      EXPECT_LT(std::abs(pa[s] - pb[s]), 1e-10);
      sum += pa[s];
    }
    EXPECT_NEAR(sum, 1.0, 1e-10);
  }
}

TEST(Syndrome, SampledFrequenciesFollowBranches) {
  ErrorModel partial;
  partial.kind = ErrorKind::partial_decoherence;
  partial.k = 1;
  partial.theta = 1.1;
  SplitMix64 rng(5);
  const StateVector logical = random_state({2}, rng);
  const auto state = apply_errors(encode(logical), partial, rng).state;
  const auto exact = syndrome_and_recover(state, logical);
  const int n = 20000;
  int flagged = 0;
  for (int i = 0; i < n; ++i) {
    if (syndrome_and_recover_sampled(state, logical, rng).outcome.label == "10") ++flagged;
  }
  double p10 = 0.0;
  for (const auto& br : exact.branches) {
    if (br.outcome.label == "10") p10 = br.outcome.probability;
  }
  // qubit 0 flips with amplitude (1 - cos theta) / 2 on |0>, -sin theta / 2 on |1>
  EXPECT_NEAR(p10, (1.0 - std::cos(1.1)) / 2.0, 1e-12);
  EXPECT_NEAR(flagged / static_cast<double>(n), p10, 4.0 * std::sqrt(p10 * (1 - p10) / n));
}

TEST(Syndrome, PartialDecoherenceBeatsUncorrected) {
  SplitMix64 rng(6);
  const StateVector logical = random_state({2}, rng);
  ErrorModel partial;
  partial.kind = ErrorKind::partial_decoherence;
  partial.k = 1;
  for (int i = 1; i <= 8; ++i) {
    partial.theta = i * std::numbers::pi / 16.0;
    const auto state = apply_errors(encode(logical), partial, rng).state;
    const double bare = fidelity(encode(logical), reduce_pure(state.amplitudes(), state.dims(), {0, 1, 2}));
    // |e_I|^2 = (1 + cos theta) / 2; everything else leaves the code space
    EXPECT_NEAR(bare, 0.5 * (1.0 + std::cos(partial.theta)), 1e-12);
    const double corrected = syndrome_and_recover(state, logical).fidelity;
    EXPECT_NEAR(corrected, 1.0, 1e-10);
    EXPECT_GT(corrected, bare);
  }
}

TEST(PauliExpansion, IdentityAndControlledPhase) {
  SplitMix64 rng(7);
  const StateVector e0 = random_state({3}, rng);
  const auto id = expand_in_pauli_errors(Matrix::Identity(6, 6), e0);
  EXPECT_LT((id.e_i - e0.amplitudes()).norm(), 1e-15);
  EXPECT_LT(id.e_x.norm() + id.e_y.norm() + id.e_z.norm(), 1e-15);

  Matrix cz = Matrix::Identity(4, 4);
  cz(3, 3) = -1.0;
  const auto ph = expand_in_pauli_errors(cz, ket_plus());
  EXPECT_LT(ph.e_x.norm() + ph.e_y.norm(), 1e-15);
  EXPECT_LT((ph.e_i - ket0().amplitudes() / std::sqrt(2.0)).norm(), 1e-15);
  EXPECT_LT((ph.e_z - ket1().amplitudes() / std::sqrt(2.0)).norm(), 1e-15);
  EXPECT_THROW(expand_in_pauli_errors(cz, e0), std::invalid_argument);
}

TEST(PauliExpansion, ReconstructsRandomUnitaries) {
  SplitMix64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t de = 1 + trial % 4;
    const Matrix u = random_unitary(2 * de, rng);
    const StateVector psi = random_state({2}, rng), e0 = random_state({de}, rng);
    const auto ex = expand_in_pauli_errors(u, psi, e0);
    EXPECT_LT((ex.reconstruct(psi) - u * kron(psi.amplitudes(), e0.amplitudes())).norm(), 1e-10);
    EXPECT_LT((ex.e_y - pauli_component_oracle(u, pauli::Y(), e0.amplitudes())).norm(), 1e-12);
    EXPECT_LT((ex.e_z - pauli_component_oracle(u, pauli::Z(), e0.amplitudes())).norm(), 1e-12);
  }
}

TEST(MonteCarlo, MatchesDoubleErrorCount) {
  for (double p : {0.05, 0.1, 0.2}) {
    const std::size_t shots = 20000;
    const auto r = monte_carlo_logical_error(p, shots, 42);
    const double q = logical_error_oracle(p);
    EXPECT_NEAR(r.corrected, q, 4.0 * std::sqrt(q * (1 - q) / shots) + 1e-4) << "p = " << p;
    EXPECT_NEAR(r.uncorrected, p, 4.0 * std::sqrt(p * (1 - p) / shots)) << "p = " << p;
    EXPECT_LT(r.corrected, r.uncorrected);
  }
  EXPECT_EQ(monte_carlo_logical_error(0.0, 100, 1).corrected, 0.0);
  EXPECT_THROW(monte_carlo_logical_error(0.1, 0, 1), std::invalid_argument);
}

TEST(MonteCarlo, IndependentOfWorkerCount) {
  const auto a = monte_carlo_logical_error(0.1, 5000, 9, 1);
  const auto b = monte_carlo_logical_error(0.1, 5000, 9, 4);
  EXPECT_EQ(a.corrected, b.corrected);
  EXPECT_EQ(a.uncorrected, b.uncorrected);
}
