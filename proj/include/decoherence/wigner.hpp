#pragma once

// Discrete Wigner transform W(x, p) = (1/pi) int dy rho(x + y, x - y) exp(-2 i p y).

#include "decoherence/grid.hpp"

#include <numbers>

namespace decoherence {

struct WignerGrid {
  RealVector x;
  RealVector p;
  Eigen::MatrixXd w;  // w(i, m) = W(x_i, p_m)
  /// sum W dx dp over the grid.
  double normalization = 0.0;

  /// sum |min(W, 0)| dx dp.
  double negativity_volume() const {
    const double dx = x.size() > 1 ? x(1) - x(0) : 1.0;
    const double dp = p.size() > 1 ? p(1) - p(0) : 1.0;
    return (-w.array()).max(0.0).sum() * dx * dp;
  }
};

/// Largest |p| the grid resolves: the y-step is dx, so exp(-2 i p k dx) aliases
/// beyond pi / (2 dx).
inline double wigner_nyquist(double dx) { return std::numbers::pi / (2.0 * dx); }

/// Uniform momentum grid covering one full period [-pi/2dx, pi/2dx) with n points.
inline RealVector wigner_full_momentum_grid(double dx, std::size_t n) {
  const double pmax = wigner_nyquist(dx);
  const double dp = 2.0 * pmax / static_cast<double>(n);
  RealVector p(static_cast<Eigen::Index>(n));
  for (Eigen::Index m = 0; m < p.size(); ++m) p(m) = -pmax + dp * static_cast<double>(m);
  return p;
}

inline WignerGrid wigner_transform(const GridState& state, const RealVector& p) {
  const double dx = state.spacing();
  const double pmax = wigner_nyquist(dx);
  if (p.size() == 0) throw std::invalid_argument("wigner_transform: empty momentum grid");
  if (p.cwiseAbs().maxCoeff() > pmax * (1.0 + 1e-12)) {
    throw std::invalid_argument("wigner_transform: momentum grid exceeds the Nyquist limit pi/(2 dx) = " +
                                std::to_string(pmax) + "; refine the position grid");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(state.size());
  const Matrix& rho = state.rho();
  WignerGrid out{state.x(), p, Eigen::MatrixXd::Zero(n, p.size()), 0.0};
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index kmax = std::min(i, n - 1 - i);
    for (Eigen::Index m = 0; m < p.size(); ++m) {
      const Complex step = std::polar(1.0, -2.0 * p(m) * dx);
      Complex phase = step;
      double acc = rho(i, i).real();
      for (Eigen::Index k = 1; k <= kmax; ++k) {
        acc += 2.0 * (rho(i + k, i - k) * phase).real();
        phase *= step;
      }
      out.w(i, m) = dx / std::numbers::pi * acc;
    }
  }
  const double dp = p.size() > 1 ? p(1) - p(0) : 0.0;
  out.normalization = out.w.sum() * dx * dp;
  return out;
}

/// Hermite functions phi_n(x) of the oscillator with mass M and frequency Omega,
/// as columns of a (grid size x levels) matrix.
inline Eigen::MatrixXd hermite_functions(const RealVector& x, std::size_t levels, double mass, double omega) {
  const double s = std::sqrt(mass * omega);
  Eigen::MatrixXd phi(x.size(), static_cast<Eigen::Index>(levels));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = s * x(i);
    double prev = 0.0;
    double cur = std::pow(mass * omega / std::numbers::pi, 0.25) * std::exp(-0.5 * xi * xi);
    for (Eigen::Index n = 0; n < phi.cols(); ++n) {
      phi(i, n) = cur;
      const double next = std::sqrt(2.0 / static_cast<double>(n + 1)) * xi * cur -
                          std::sqrt(static_cast<double>(n) / static_cast<double>(n + 1)) * prev;
      prev = cur;
      cur = next;
    }
  }
  return phi;
}

/// Position kernel of an oscillator density matrix. The grid must hold the
/// state: a grid trace off by more than 1e-6 is rejected; smaller quadrature
/// defects are normalized away.
inline GridState oscillator_to_grid(const Matrix& rho, double mass, double omega, const RealVector& x) {
  const Eigen::MatrixXd phi = hermite_functions(x, static_cast<std::size_t>(rho.rows()), mass, omega);
  const Matrix cphi = phi.cast<Complex>();
  Matrix kernel = cphi * rho * cphi.transpose();
  const double dx = x(1) - x(0);
  const double tr = kernel.diagonal().real().sum() * dx;
  if (std::abs(tr - 1.0) > 1e-6) {
    throw std::invalid_argument("oscillator_to_grid: grid does not contain the state (trace " + std::to_string(tr) + ")");
  }
  return GridState(x, symmetrize(kernel / tr));
}

}  // namespace decoherence
