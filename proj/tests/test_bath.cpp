#include "decoherence/bath.hpp"

#include <gtest/gtest.h>

using namespace decoherence;

namespace {

constexpr double kPi = std::numbers::pi;

SpectralDensity gaussian_spike(double j0, double w0, double s, double w_max, int n) {
  RealVector w = RealVector::LinSpaced(n, 0.0, w_max);
  RealVector v(n);
  for (int i = 0; i < n; ++i) v(i) = j0 * std::exp(-0.5 * std::pow((w(i) - w0) / s, 2)) / (std::sqrt(2.0 * kPi) * s);
  return SpectralDensity::sampled(w, v);
}

}  // namespace

TEST(SpectralDensity, OhmicShapeAndValidation) {
  const auto j = SpectralDensity::ohmic(2.0, 0.1, 3.0);
  EXPECT_NEAR(j(1.5), 2.0 * 2.0 * 0.1 / kPi * 1.5 * 9.0 / (9.0 + 2.25), 1e-15);
  EXPECT_EQ(j(0.0), 0.0);
  EXPECT_THROW(SpectralDensity::ohmic(1.0, 0.1, std::numeric_limits<double>::infinity()), std::invalid_argument);
  EXPECT_THROW(SpectralDensity::ohmic(1.0, -0.1, 1.0), std::invalid_argument);
  RealVector w(3), v(3);
  w << 0.0, 1.0, 2.0;
  v << 0.0, -1.0, 0.0;
  EXPECT_THROW(SpectralDensity::sampled(w, v), std::invalid_argument);
}

TEST(BathKernels, EtaVanishesAtZero) {
  const auto j = SpectralDensity::ohmic(1.0, 0.05, 1.0);
  RealVector tau(3);
  tau << 0.0, 0.5, 1.0;
  const auto k = bath_kernels(j, 0.7, tau);
  EXPECT_EQ(k.eta(0), 0.0);
  EXPECT_GT(k.nu(0), 0.0);
  EXPECT_THROW(bath_kernels(j, -1.0, tau), std::invalid_argument);
}

TEST(BathKernels, NarrowSpikeLimit) {
  const double j0 = 0.3, w0 = 2.0, s = 0.02, temp = 1.5;
  const auto j = gaussian_spike(j0, w0, s, 4.0, 8001);
  RealVector tau = RealVector::LinSpaced(9, 0.0, 4.0);
  QuadratureConfig q;
  q.omega_points = 8001;
  const auto k = bath_kernels(j, temp, tau, q);
  // Direct evaluation over the analytic spike.
  const QuadratureRule gl = gauss_legendre(200, w0 - 10 * s, w0 + 10 * s);
  for (Eigen::Index i = 0; i < tau.size(); ++i) {
    double nu = 0.0, eta = 0.0;
    for (Eigen::Index n = 0; n < gl.nodes.size(); ++n) {
      const double w = gl.nodes(n);
      const double jw = j0 * std::exp(-0.5 * std::pow((w - w0) / s, 2)) / (std::sqrt(2.0 * kPi) * s);
      nu += gl.weights(n) * jw / std::tanh(w / (2 * temp)) * std::cos(w * tau(i));
      eta += gl.weights(n) * jw * std::sin(w * tau(i));
    }
    EXPECT_NEAR(k.nu(i), nu, 1e-4 * j0);
    EXPECT_NEAR(k.eta(i), eta, 1e-4 * j0);
    // narrow-peak limit; finite width smears the phase by exp(-s^2 tau^2 / 2)
    const double tol = j0 * (s * s * tau(i) * tau(i) + 2e-3);
    EXPECT_NEAR(k.nu(i), j0 / std::tanh(w0 / (2 * temp)) * std::cos(w0 * tau(i)), tol);
    EXPECT_NEAR(k.eta(i), j0 * std::sin(w0 * tau(i)), tol);
  }
}

TEST(BathKernels, HighTemperatureScaling) {
  const double m = 1.0, g0 = 0.1, lam = 1.0;
  const auto j = SpectralDensity::ohmic(m, g0, lam);
  RealVector tau = RealVector::LinSpaced(6, 0.0, 5.0);
  const auto k1 = bath_kernels(j, 1e3, tau), k2 = bath_kernels(j, 2e3, tau);
  const QuadratureRule gl = gauss_legendre(400, 0.0, 10.0 * lam);
  for (Eigen::Index i = 0; i < tau.size(); ++i) {
    double oracle = 0.0;  // 2 int J(w) cos(w tau) / w dw
    for (Eigen::Index n = 0; n < gl.nodes.size(); ++n) {
      const double w = gl.nodes(n);
      oracle += gl.weights(n) * 2.0 * (2.0 * m * g0 / kPi) * lam * lam / (lam * lam + w * w) * std::cos(w * tau(i));
    }
    EXPECT_NEAR(k1.nu(i) / 1e3, k2.nu(i) / 2e3, 1e-6 * std::abs(oracle) + 1e-9);
    EXPECT_NEAR(k1.nu(i) / 1e3, oracle, 1e-4 * std::abs(oracle) + 1e-7);
  }
}

TEST(QbmCoefficients, CaldeiraLeggettDiffusionLimit) {
  const double m = 1.0, g0 = 0.05, lam = 1.0, omega = 0.1;
  const auto c = qbm_coefficients(SpectralDensity::ohmic(m, g0, lam), 100.0 * lam, omega);
  EXPECT_NEAR(c.normal_diffusion / (2.0 * m * g0 * 100.0), 1.0, 0.05);
  EXPECT_GE(c.normal_diffusion, 0.0);
  EXPECT_LT(c.residual, 1e-6);
}

TEST(QbmCoefficients, DampingIndependentOfTemperature) {
  const auto j = SpectralDensity::ohmic(1.0, 0.05, 1.0);
  const auto a = qbm_coefficients(j, 0.5, 0.3), b = qbm_coefficients(j, 5.0, 0.3);
  EXPECT_NEAR(a.damping, b.damping, 1e-12);
  // delta-function limit: gamma = (pi/2) J(Omega) / (M Omega) = gamma0 Lambda^2 / (Lambda^2 + Omega^2)
  EXPECT_NEAR(a.damping, 0.05 / (1.0 + 0.09), 1e-5 * 0.05);
}

TEST(QbmCoefficients, ZeroDensityGivesZero) {
  RealVector w = RealVector::LinSpaced(64, 0.0, 10.0), v = RealVector::Zero(64);
  const auto c = qbm_coefficients(SpectralDensity::sampled(w, v), 1.0, 0.5);
  EXPECT_EQ(c.shift, 0.0);
  EXPECT_EQ(c.damping, 0.0);
  EXPECT_EQ(c.normal_diffusion, 0.0);
  EXPECT_EQ(c.anomalous_diffusion, 0.0);
}

TEST(SpinBosonCoefficients, NoTunnelling) {
  const auto c = spin_boson_coefficients(SpectralDensity::ohmic(1.0, 0.01, 1.0), 1.0, 0.0);
  EXPECT_EQ(c.decay_real, 0.0);
  EXPECT_EQ(c.decay_imag, 0.0);
  EXPECT_GT(c.dephasing, 0.0);
}

TEST(SpinBosonCoefficients, StructuralIdentityWithQbm) {
  const auto j = SpectralDensity::ohmic(1.3, 0.02, 1.0);
  const double d0 = 0.4, temp = 0.8;
  const auto sb = spin_boson_coefficients(j, temp, d0);
  const auto qb = qbm_coefficients(j, temp, d0);
  EXPECT_NEAR(sb.dephasing, qb.normal_diffusion, 1e-14);
  EXPECT_NEAR(sb.decay_imag, 1.3 * d0 * qb.damping, 1e-14);
  EXPECT_NEAR(sb.decay_real, -1.3 * d0 * qb.anomalous_diffusion, 1e-14);
}

TEST(SpinBosonCoefficients, RefinedGridOracle) {
  const auto j = SpectralDensity::ohmic(1.0, 0.02, 1.0);
  const double d0 = 0.5, temp = 0.7;
  const auto c = spin_boson_coefficients(j, temp, d0);
  const auto fine = spin_boson_coefficients(j, temp, d0, QuadratureConfig{}.refined());
  EXPECT_NEAR(c.dephasing, fine.dephasing, 1e-6 * std::abs(fine.dephasing));
  EXPECT_NEAR(c.decay_real, fine.decay_real, 1e-6 * std::abs(fine.decay_real));
  EXPECT_NEAR(c.decay_imag, fine.decay_imag, 1e-6 * std::abs(fine.decay_imag));
  // D-tilde = (pi/2) J(Delta0) coth(Delta0 / 2T)
  EXPECT_NEAR(c.dephasing, 0.5 * kPi * j(d0) / std::tanh(d0 / (2 * temp)), 1e-5 * c.dephasing);
}

TEST(Coefficients, StableUnderResolutionDoubling) {
  const auto j = SpectralDensity::ohmic(1.0, 0.03, 1.0);
  const auto a = qbm_coefficients(j, 2.0, 0.6), b = qbm_coefficients(j, 2.0, 0.6, QuadratureConfig{}.refined());
  for (auto [x, y] : {std::pair{a.shift, b.shift}, {a.damping, b.damping}, {a.normal_diffusion, b.normal_diffusion},
                      {a.anomalous_diffusion, b.anomalous_diffusion}}) {
    EXPECT_LT(std::abs(x - y), 1e-4 * std::abs(y));
  }
}

TEST(Coefficients, SlowThermalTailReported) {
  EXPECT_THROW(qbm_coefficients(SpectralDensity::ohmic(1.0, 0.03, 1.0), 0.02, 0.6), numerical_error);
}

TEST(EffectiveSpectralDensity, Limits) {
  const auto j = SpectralDensity::ohmic(1.0, 0.1, 1.0);
  const auto zero = effective_spectral_density(j, 0.0);
  const auto hot = effective_spectral_density(j, 1e4);
  const double temp = 0.35;
  const auto warm = effective_spectral_density(j, temp);
  const double w = 2.0 * temp;
  EXPECT_NEAR(zero(0.5), j(0.5), 1e-5 * j(0.5));  // piecewise-linear resampling
  EXPECT_NEAR(hot(0.5), j(0.5) * 0.5 / 2e4, 1e-6 * j(0.5) * 0.5 / 2e4);
  EXPECT_NEAR(warm(w), j(w) * std::tanh(1.0), 1e-5 * j(w));
}
