#pragma once

#include "decoherence/core.hpp"

#include <cstdint>
#include <limits>
#include <random>

namespace decoherence {

/// SplitMix64 stream. Satisfies UniformRandomBitGenerator. Streams for
/// independent tasks are derived with `stream(master, index)`, so the numbers a
/// task sees depend only on (master seed, task index) and never on scheduling.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static SplitMix64 stream(std::uint64_t master_seed, std::uint64_t index) {
    return SplitMix64(mix(master_seed ^ mix(index + 0x632BE59BD9B4E019ULL)));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(state_ += kGolden); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

template <class Rng>
Matrix ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) g(i, j) = Complex(normal(rng), normal(rng));
  }
  return g;
}

/// Haar-random unitary (QR of a Ginibre matrix with phase-fixed R diagonal).
template <class Rng>
Matrix random_unitary(Eigen::Index d, Rng& rng) {
  const Matrix g = ginibre(d, d, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < d; ++k) {
    const Complex diag = r(k, k);
    if (std::abs(diag) > 0) q.col(k) *= diag / std::abs(diag);
  }
  return q;
}

template <class Rng>
StateVector random_state(Dims dims, Rng& rng) {
  const auto d = static_cast<Eigen::Index>(detail::product(dims));
  Vector v = ginibre(d, 1, rng).col(0);
  return StateVector::normalized(std::move(v), std::move(dims));
}

/// Random full-rank density matrix from the Hilbert-Schmidt ensemble.
template <class Rng>
DensityMatrix random_density(Dims dims, Rng& rng) {
  const auto d = static_cast<Eigen::Index>(detail::product(dims));
  const Matrix g = ginibre(d, d, rng);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix(symmetrize(rho), std::move(dims));
}

/// Random Hermitian matrix with entries of order one.
template <class Rng>
Matrix random_hermitian(Eigen::Index d, Rng& rng) {
  return symmetrize(ginibre(d, d, rng));
}

}  // namespace decoherence
