#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace decoherence {

struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// n-point Gauss-Legendre rule on [a, b] (Newton iteration on P_n).
inline QuadratureRule gauss_legendre(std::size_t n, double a = -1.0, double b = 1.0) {
  if (n == 0) throw std::invalid_argument("gauss_legendre: n must be positive");
  const auto m = static_cast<Eigen::Index>(n);
  QuadratureRule rule{Eigen::VectorXd(m), Eigen::VectorXd(m)};
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (Eigen::Index i = 0; i < (m + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = p2;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = p2;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes(i) = mid - half * x;
    rule.nodes(m - 1 - i) = mid + half * x;
    rule.weights(i) = rule.weights(m - 1 - i) = half * w;
  }
  return rule;
}

/// Trapezoid weights for a uniform grid of n points with spacing h.
inline Eigen::VectorXd trapezoid_weights(std::size_t n, double h) {
  Eigen::VectorXd w = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), h);
  if (n > 0) {
    w(0) *= 0.5;
    w(static_cast<Eigen::Index>(n) - 1) *= 0.5;
  }
  if (n == 1) w(0) = 0.0;
  return w;
}

}  // namespace decoherence
