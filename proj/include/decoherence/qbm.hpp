#pragma once

// Quantum Brownian motion: the Caldeira-Leggett generator in a truncated
// oscillator basis and the free-particle version on a position grid.

#include "decoherence/grid.hpp"
#include "decoherence/lindblad.hpp"

#include <Eigen/Sparse>

namespace decoherence {

/// a in the number basis {|0>, ..., |levels-1>}.
inline Matrix annihilation(std::size_t levels) {
  const auto d = static_cast<Eigen::Index>(levels);
  Matrix a = Matrix::Zero(d, d);
  for (Eigen::Index n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

/// x = (a + a^dag) / sqrt(2 M Omega).
inline Matrix position_operator(std::size_t levels, double mass, double omega) {
  const Matrix a = annihilation(levels);
  return (a + a.adjoint()) / std::sqrt(2.0 * mass * omega);
}

/// p = i sqrt(M Omega / 2) (a^dag - a).
inline Matrix momentum_operator(std::size_t levels, double mass, double omega) {
  const Matrix a = annihilation(levels);
  return kI * std::sqrt(mass * omega / 2.0) * (a.adjoint() - a);
}

/// Coherent state |alpha> truncated to `levels` and renormalized.
inline StateVector coherent_state(Complex alpha, std::size_t levels) {
  Vector c(static_cast<Eigen::Index>(levels));
  Complex term = std::exp(-0.5 * std::norm(alpha));
  for (Eigen::Index n = 0; n < c.size(); ++n) {
    c(n) = term;
    term *= alpha / std::sqrt(static_cast<double>(n + 1));
  }
  return StateVector::normalized(std::move(c), {levels});
}

inline StateVector fock_state(std::size_t n, std::size_t levels) { return StateVector::basis({levels}, n); }

struct CaldeiraLeggettParams {
  double mass = 1.0;
  double omega = 1.0;        // bare oscillator frequency
  double gamma0 = 0.0;       // relaxation rate
  double cutoff = 1.0;       // bath cutoff Lambda, enters the frequency shift
  double temperature = 0.0;  // k_B T in energy units
  std::size_t n_max = 60;    // highest retained Fock level
  bool pure_decoherence = false;
};

/// d rho/dt = -i[H', rho] - i gamma0 [x, {p, rho}] - 2 M gamma0 T [x, [x, rho]],
/// H' = p^2/2M + M (Omega^2 - 2 gamma0 Lambda) x^2 / 2. The friction term is
/// dropped when pure_decoherence is set.
class CaldeiraLeggett {
 public:
  explicit CaldeiraLeggett(const CaldeiraLeggettParams& p) : p_(p) {
    if (p.n_max < 4) throw std::invalid_argument("CaldeiraLeggett: n_max must be at least 4");
    if (!(p.mass > 0.0) || !(p.omega > 0.0)) throw std::invalid_argument("CaldeiraLeggett: mass and Omega must be positive");
    if (!(p.gamma0 >= 0.0) || !(p.temperature >= 0.0) || !(p.cutoff > 0.0)) {
      throw std::invalid_argument("CaldeiraLeggett: gamma0, T must be nonnegative and Lambda positive");
    }
    const std::size_t levels = p.n_max + 1;
    const auto d = static_cast<Eigen::Index>(levels);
    x_ = position_operator(levels, p.mass, p.omega);
    p_op_ = momentum_operator(levels, p.mass, p.omega);
    // Squares from a basis two levels larger, then cropped, so the top
    // diagonal entries are not corrupted by the truncation.
    const Matrix xl = position_operator(levels + 2, p.mass, p.omega);
    const Matrix pl = momentum_operator(levels + 2, p.mass, p.omega);
    const Matrix x2 = (xl * xl).topLeftCorner(d, d);
    const Matrix p2 = (pl * pl).topLeftCorner(d, d);
    h_ = symmetrize(p2 / (2.0 * p.mass) + 0.5 * p.mass * shifted_frequency_squared() * x2);
    xs_ = x_.sparseView();
    ps_ = p_op_.sparseView();
    hs_ = h_.sparseView();
  }

  const CaldeiraLeggettParams& params() const { return p_; }
  std::size_t levels() const { return p_.n_max + 1; }
  const Matrix& x() const { return x_; }
  const Matrix& p() const { return p_op_; }
  const Matrix& hamiltonian() const { return h_; }

  double shifted_frequency_squared() const { return p_.omega * p_.omega - 2.0 * p_.gamma0 * p_.cutoff; }
  double diffusion() const { return 2.0 * p_.mass * p_.gamma0 * p_.temperature; }

  /// gamma0 (dx / lambda_dB)^2 with lambda_dB = (2 M T)^(-1/2).
  double localization_rate(double dx) const { return diffusion() * dx * dx; }

  Matrix operator()(const Matrix& rho) const {
    // x, p and H' are banded in the number basis
    auto comm = [](const SparseMatrix& a, const Matrix& m) -> Matrix { return a * m - m * a; };
    Matrix out = -kI * comm(hs_, rho);
    if (!p_.pure_decoherence && p_.gamma0 != 0.0) {
      const Matrix anti = ps_ * rho + rho * ps_;
      out -= kI * p_.gamma0 * comm(xs_, anti);
    }
    const double d = diffusion();
    if (d != 0.0) out -= d * comm(xs_, comm(xs_, rho));
    return out;
  }

  /// Population in the top tenth of the retained levels (at least two).
  double tail_population(const Matrix& rho) const {
    const Eigen::Index d = rho.rows();
    const Eigen::Index tail = std::max<Eigen::Index>(2, d / 10);
    return rho.diagonal().real().tail(tail).sum();
  }

 private:
  using SparseMatrix = Eigen::SparseMatrix<Complex>;
  CaldeiraLeggettParams p_;
  Matrix x_, p_op_, h_;
  SparseMatrix xs_, ps_, hs_;
};

struct OscillatorRun {
  TimeSeries series;
  double max_tail_population = 0.0;
  /// True when the tail population stayed below 1e-8 at every snapshot.
  bool truncation_certified = true;
};

inline OscillatorRun evolve_caldeira_leggett(const CaldeiraLeggett& cl, const DensityMatrix& rho0, double t_final,
                                             double dt, const EvolveOptions& opt = {}) {
  if (rho0.dim() != cl.levels()) throw std::invalid_argument("evolve_caldeira_leggett: dimension mismatch");
  OscillatorRun run{evolve_generator(cl, rho0.matrix(), t_final, dt, opt)};
  for (const auto& s : run.series.states) run.max_tail_population = std::max(run.max_tail_population, cl.tail_population(s));
  run.truncation_certified = run.max_tail_population < 1e-8;
  return run;
}

struct FreeParticleParams {
  double mass = 1.0;
  double gamma = 1.0;      // friction rate
  double diffusion = 1.0;  // D, 2 M gamma T in the Caldeira-Leggett limit
};

/// Free Brownian particle in the position representation:
///   d rho/dt = (i/2M)(d_x^2 - d_x'^2) rho - gamma (x - x')(d_x - d_x') rho - D (x - x')^2 rho,
/// with central differences and rho = 0 outside the grid. Acts on the
/// unit-trace discrete matrix.
class FreeParticleGrid {
 public:
  FreeParticleGrid(RealVector x, const FreeParticleParams& p) : x_(std::move(x)), p_(p) {
    if (x_.size() < 3) throw std::invalid_argument("FreeParticleGrid: grid too small");
    dx_ = x_(1) - x_(0);
    if (!(dx_ > 0.0) || !(p.mass > 0.0) || !(p.gamma >= 0.0) || !(p.diffusion >= 0.0)) {
      throw std::invalid_argument("FreeParticleGrid: invalid parameters");
    }
  }

  const RealVector& x() const { return x_; }
  const FreeParticleParams& params() const { return p_; }

  Matrix operator()(const Matrix& rho) const {
    const Eigen::Index n = rho.rows();
    const Complex kin = kI / (2.0 * p_.mass * dx_ * dx_);
    const double fr = p_.gamma / (2.0 * dx_);
    Matrix out(n, n);
    auto at = [&](Eigen::Index i, Eigen::Index j) -> Complex {
      return (i < 0 || j < 0 || i >= n || j >= n) ? Complex(0.0) : rho(i, j);
    };
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const Complex c = rho(i, j);
        const Complex ip = at(i + 1, j), im = at(i - 1, j), jp = at(i, j + 1), jm = at(i, j - 1);
        const double sep = x_(i) - x_(j);
        out(i, j) = kin * ((ip + im) - (jp + jm)) - fr * sep * ((ip - im) - (jp - jm)) - p_.diffusion * sep * sep * c;
      }
    }
    return out;
  }

 private:
  RealVector x_;
  FreeParticleParams p_;
  double dx_ = 0.0;
};

}  // namespace decoherence
