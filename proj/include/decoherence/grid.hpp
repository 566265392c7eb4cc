#pragma once

// Position-space density kernels rho(x, x') on a uniform grid.

#include "decoherence/core.hpp"

namespace decoherence {

/// rho holds the continuum kernel, so the trace is sum_i rho(x_i, x_i) * dx.
class GridState {
 public:
  GridState(RealVector x, Matrix rho) : x_(std::move(x)), rho_(std::move(rho)) {
    if (x_.size() < 2) throw std::invalid_argument("GridState: need at least two grid points");
    if (rho_.rows() != x_.size() || rho_.cols() != x_.size()) {
      throw std::invalid_argument("GridState: kernel size does not match grid");
    }
    dx_ = x_(1) - x_(0);
    if (!(dx_ > 0.0)) throw std::invalid_argument("GridState: grid must increase");
    for (Eigen::Index i = 1; i < x_.size(); ++i) {
      if (std::abs((x_(i) - x_(i - 1)) - dx_) > 1e-9 * dx_) throw std::invalid_argument("GridState: grid not uniform");
    }
    const double scale = std::max(detail::max_abs(rho_), 1e-300);
    if (hermiticity_defect(rho_) > tolerance::kHermitian * scale) {
      throw std::invalid_argument("GridState: kernel is not Hermitian");
    }
    if (std::abs(trace() - 1.0) > 1e-8) {
      throw std::invalid_argument("GridState: trace " + std::to_string(trace()) + " differs from 1");
    }
  }

  /// Pure state from sampled wave-function values, normalized on the grid.
  static GridState from_wavefunction(RealVector x, Vector psi) {
    if (psi.size() != x.size() || x.size() < 2) throw std::invalid_argument("GridState: size mismatch");
    const double dx = x(1) - x(0);
    const double norm2 = psi.squaredNorm() * dx;
    if (!(norm2 > 0.0)) throw std::invalid_argument("GridState: zero wave function");
    psi /= std::sqrt(norm2);
    Matrix rho = psi * psi.adjoint();
    return GridState(std::move(x), std::move(rho));
  }

  /// Builds from a unit-trace matrix of grid amplitudes (the kernel times dx).
  static GridState from_discrete(RealVector x, const Matrix& discrete) {
    const double dx = x(1) - x(0);
    return GridState(std::move(x), discrete / dx);
  }

  const RealVector& x() const { return x_; }
  const Matrix& rho() const { return rho_; }
  double spacing() const { return dx_; }
  std::size_t size() const { return static_cast<std::size_t>(x_.size()); }
  double trace() const { return rho_.diagonal().real().sum() * dx_; }
  /// Unit-trace matrix rho * dx, the form used by the integrators.
  Matrix discrete() const { return rho_ * dx_; }

  RealVector density() const { return rho_.diagonal().real(); }

  double mean_position() const { return (x_.array() * density().array()).sum() * dx_; }

  double position_variance() const {
    const double m = mean_position();
    return ((x_.array() - m).square() * density().array()).sum() * dx_;
  }

 private:
  RealVector x_;
  Matrix rho_;
  double dx_ = 0.0;
};

/// Normalized Gaussian wave packet exp(-(x - x0)^2 / (4 sigma^2) + i p0 x) sampled on x.
inline Vector gaussian_packet(const RealVector& x, double x0, double sigma, double p0 = 0.0) {
  Vector psi(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double d = x(i) - x0;
    psi(i) = std::exp(-d * d / (4.0 * sigma * sigma)) * std::polar(1.0, p0 * x(i));
  }
  return psi;
}

}  // namespace decoherence
