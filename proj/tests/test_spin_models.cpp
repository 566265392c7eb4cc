#include "decoherence/channels.hpp"
#include "decoherence/random.hpp"
#include "decoherence/spin_boson.hpp"
#include "decoherence/spin_spin.hpp"

#include <gtest/gtest.h>

using namespace decoherence;

namespace {

double first_below(const RealVector& times, const RealVector& values, double level) {
  for (Eigen::Index k = 1; k < values.size(); ++k) {
    if (values(k) <= level) {
      const double f = (values(k - 1) - level) / (values(k - 1) - values(k));
      return times(k - 1) + f * (times(k) - times(k - 1));
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// One thermal mode, by exponentiating the two qubit-conditioned mode Hamiltonians.
double single_mode_oracle(double w, double g, double temp, double t, int levels = 60) {
  const Matrix a = annihilation(static_cast<std::size_t>(levels));
  const Matrix num = a.adjoint() * a, q = a + a.adjoint();
  auto propagator = [&](double sign) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(w * num + sign * g * q));
    Vector ph(levels);
    for (int i = 0; i < levels; ++i) ph(i) = std::polar(1.0, -es.eigenvalues()(i) * t);
    return Matrix(es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint());
  };
  const Matrix rho = truncated_thermal_state(w, temp, static_cast<std::size_t>(levels));
  // rho_01(t) / rho_01(0) = Tr[U_- rho U_+^dag]
  return std::abs((propagator(-1.0) * rho * propagator(1.0).adjoint()).trace());
}

}  // namespace

TEST(ExactDephasing, ZeroCouplingStaysCoherent) {
  BathModes modes{RealVector::LinSpaced(5, 0.1, 1.0), RealVector::Zero(5)};
  const RealVector t = RealVector::LinSpaced(10, 0.0, 20.0);
  EXPECT_LT((exact_dephasing(modes, 1.0, t).array() - 1.0).abs().maxCoeff(), 1e-15);
}

TEST(ExactDephasing, SingleModeMatchesFockOracle) {
  for (double temp : {0.0, 0.4}) {
    for (double t : {0.3, 1.7, 4.0}) {
      const double w = 1.3, g = 0.35;
      EXPECT_NEAR(std::exp(mode_log_coherence(w, g, temp, t)), single_mode_oracle(w, g, temp, t), 1e-10)
          << "T = " << temp << " t = " << t;
    }
  }
  // revival after a full mode period
  EXPECT_NEAR(mode_log_coherence(2.0, 0.3, 0.0, std::numbers::pi), 0.0, 1e-14);
}

TEST(ExactDephasing, DilationAgreesAndPopulationsFrozen) {
  BathModes modes{RealVector(2), RealVector(2)};
  modes.omega << 0.8, 1.9;
  modes.coupling << 0.2, 0.25;
  const RealVector t = RealVector::LinSpaced(6, 0.0, 3.0);
  const StateVector psi = bloch_state(1.0, 0.3);
  const auto reduced = spin_boson_dilation(modes, 0.3, 0.7, psi, t, 14);
  const RealVector oracle = exact_dephasing(modes, 0.3, t);
  const Matrix rho0 = psi.amplitudes() * psi.amplitudes().adjoint();
  for (Eigen::Index k = 0; k < t.size(); ++k) {
    EXPECT_NEAR(std::abs(reduced[k](0, 1)) / std::abs(rho0(0, 1)), oracle(k), 2e-6);
    EXPECT_NEAR(reduced[k](0, 0).real(), rho0(0, 0).real(), 1e-10);
    EXPECT_NEAR(reduced[k](1, 1).real(), rho0(1, 1).real(), 1e-10);
  }
}

TEST(ExactDephasing, DecayTimeScalesInverselyWithTemperature) {
  const auto j = SpectralDensity::ohmic(1.0, 1e-3, 1.0);
  const RealVector t = RealVector::LinSpaced(2001, 0.0, 40.0);
  const auto lo = spin_boson_exact_dephasing(j, 10.0, t);
  const auto hi = spin_boson_exact_dephasing(j, 20.0, t);
  const double t_lo = first_below(t, lo.coherence, std::exp(-1.0));
  const double t_hi = first_below(t, hi.coherence, std::exp(-1.0));
  ASSERT_TRUE(std::isfinite(t_lo) && std::isfinite(t_hi));
  EXPECT_NEAR(t_lo / t_hi, 2.0, 0.2);
}

TEST(ExactDephasing, CoarseBathReported) {
  const auto j = SpectralDensity::ohmic(1.0, 0.05, 1.0);
  DephasingConfig cfg;
  cfg.n_osc = 4;
  EXPECT_THROW(spin_boson_exact_dephasing(j, 5.0, RealVector::LinSpaced(50, 0.0, 40.0), cfg), numerical_error);
}

TEST(BornMarkov, PureDephasingRate) {
  CoefficientSet c;
  c.dephasing = 0.3;
  const SpinBosonBornMarkov gen(0.0, 0.0, c);
  const DensityMatrix rho = DensityMatrix::pure(bloch_state(0.9, 0.4));
  const Matrix d = gen(rho.matrix());
  EXPECT_LT(std::abs(d(0, 1) + 4.0 * 0.3 * rho(0, 1)), 1e-14);
  EXPECT_LT(std::abs(d(0, 0)), 1e-15);
}

TEST(BornMarkov, ZeroCouplingIsRabi) {
  const double delta0 = 0.9, t = 2.3;
  const SpinBosonBornMarkov gen(0.0, delta0, CoefficientSet{});
  const auto series = evolve_generator(gen, DensityMatrix::pure(ket0()).matrix(), t, 1e-3);
  // exp(i delta0 t sx / 2)|0>
  Vector psi(2);
  psi << std::cos(0.5 * delta0 * t), Complex(0.0, std::sin(0.5 * delta0 * t));
  EXPECT_LT((series.states.back() - psi * psi.adjoint()).norm(), 1e-10);
}

TEST(BornMarkov, TracePreserved) {
  SplitMix64 rng(3);
  CoefficientSet c;
  c.dephasing = 0.2;
  c.decay_real = -0.07;
  c.decay_imag = 0.11;
  const SpinBosonBornMarkov gen(0.5, 0.8, c);
  for (int i = 0; i < 20; ++i) {
    const Matrix d = gen(random_density({2}, rng).matrix());
    EXPECT_LT(std::abs(d.trace()), 1e-12);
  }
  const auto series = evolve_generator(gen, DensityMatrix::pure(ket_plus()).matrix(), 5.0, 1e-2);
  for (const auto& s : series.states) EXPECT_NEAR(s.trace().real(), 1.0, 1e-9);
}

TEST(BornMarkov, EnvelopeMatchesExactDilation) {
  const auto j = SpectralDensity::ohmic(1.0, 1e-3, 1.0);
  const double temp = 2.5;
  const auto c = spin_boson_coefficients(j, temp, 0.0);
  const SpinBosonBornMarkov gen(0.0, 0.0, c);
  const double tau = 1.0 / (4.0 * c.dephasing);
  EvolveOptions opt;
  opt.store_every = 100;
  const auto series = evolve_generator(gen, DensityMatrix::pure(ket_plus()).matrix(), tau, tau / 2000.0, opt);
  RealVector t(static_cast<Eigen::Index>(series.times.size()));
  for (std::size_t k = 0; k < series.times.size(); ++k) t(static_cast<Eigen::Index>(k)) = series.times[k];
  const auto exact = spin_boson_exact_dephasing(j, temp, t);
  for (Eigen::Index k = 0; k < t.size(); ++k) {
    const double bm = std::abs(series.states[static_cast<std::size_t>(k)](0, 1)) / 0.5;
    EXPECT_NEAR(bm, exact.coherence(k), 0.05 * exact.coherence(k)) << "t = " << t(k);
    // no tunnelling: populations fixed
    EXPECT_NEAR(series.states[static_cast<std::size_t>(k)](0, 0).real(), 0.5, 1e-10);
  }
}

TEST(SpinSpin, ZeroCouplingAndValidation) {
  const auto env = SpinEnvironment::uniform(RealVector::Zero(4), 0.0);
  const auto tr = spin_spin_exact(env, ket_plus(), RealVector::LinSpaced(5, 0.0, 3.0));
  EXPECT_LT((tr.decoherence_factor.array() - 1.0).abs().maxCoeff(), 1e-14);
  EXPECT_THROW(spin_spin_exact(SpinEnvironment::uniform(RealVector::Ones(15), 0.0), ket_plus(), RealVector::Zero(1)),
               std::invalid_argument);
}

TEST(SpinSpin, ProductOfCosines) {
  SplitMix64 rng(12);
  RealVector g(7);
  for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = 0.2 + rng.uniform();
  const RealVector t = RealVector::LinSpaced(40, 0.0, 6.0);
  const auto tr = spin_spin_exact(SpinEnvironment::uniform(g, 0.0), bloch_state(1.2, 0.5), t);
  for (Eigen::Index k = 0; k < t.size(); ++k) {
    double prod = 1.0;
    for (Eigen::Index i = 0; i < g.size(); ++i) prod *= std::abs(std::cos(g(i) * t(k)));
    EXPECT_NEAR(tr.decoherence_factor(k), prod, 1e-12);
  }
}

TEST(SpinSpin, MatchesDenseEvolutionAndChannel) {
  SplitMix64 rng(5);
  RealVector g(4);
  for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = rng.uniform();
  SpinEnvironment env = SpinEnvironment::uniform(g, 0.7, 0.3);
  for (auto& s : env.env_states) s = random_state({2}, rng);
  const StateVector psi = random_state({2}, rng);
  const double t = 1.9;
  const auto tr = spin_spin_exact(env, psi, RealVector::Constant(1, t));
  const Matrix u = spin_spin_unitary(env, t);
  const Vector joint = u * kron(psi.amplitudes(), detail::environment_amplitudes(env));
  const Matrix dense = partial_trace(Matrix(joint * joint.adjoint()), Dims(5, 2), {0});
  EXPECT_LT((tr.reduced[0] - dense).norm(), 1e-10);
  EXPECT_LT((spin_spin_state(env, psi, t).amplitudes() - joint).norm(), 1e-10);
  const auto ch = kraus_from_unitary(Operator(u, {2, 16}), spin_environment_state(env));
  EXPECT_LT((apply_channel(ch, DensityMatrix::pure(psi)).matrix() - tr.reduced[0]).norm(), 1e-10);
}
