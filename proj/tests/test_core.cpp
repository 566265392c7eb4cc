#include "decoherence/core.hpp"
#include "decoherence/random.hpp"

#include <gtest/gtest.h>

using namespace decoherence;

namespace {

// Entrywise partial trace over the second factor, straight from the definition.
Matrix trace_out_second(const Matrix& rho, std::size_t da, std::size_t db) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(da), static_cast<Eigen::Index>(da));
  for (std::size_t i = 0; i < da; ++i)
    for (std::size_t j = 0; j < da; ++j)
      for (std::size_t k = 0; k < db; ++k)
        out(i, j) += rho(i * db + k, j * db + k);
  return out;
}

Matrix trace_out_first(const Matrix& rho, std::size_t da, std::size_t db) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(db), static_cast<Eigen::Index>(db));
  for (std::size_t i = 0; i < db; ++i)
    for (std::size_t j = 0; j < db; ++j)
      for (std::size_t k = 0; k < da; ++k)
        out(i, j) += rho(k * db + i, k * db + j);
  return out;
}

}  // namespace

TEST(StateVector, RejectsUnnormalized) {
  Vector v(2);
  v << 1.0, 1.0;
  EXPECT_THROW(StateVector(v, {2}), std::invalid_argument);
  EXPECT_NO_THROW(StateVector::normalized(v, {2}));
  EXPECT_THROW(StateVector(Vector::Ones(3) / std::sqrt(3.0), {2}), std::invalid_argument);
}

TEST(DensityMatrix, Validators) {
  Matrix m(2, 2);
  m << 0.5, 0.1, 0.2, 0.5;
  EXPECT_THROW(DensityMatrix{m}, std::invalid_argument);  // not Hermitian
  m << 0.6, 0.0, 0.0, 0.6;
  EXPECT_THROW(DensityMatrix{m}, std::invalid_argument);  // trace
  m << 1.2, 0.0, 0.0, -0.2;
  EXPECT_THROW(DensityMatrix{m}, std::invalid_argument);  // negative
}

TEST(Tensor, Examples) {
  const Operator i2 = Operator::identity({2});
  EXPECT_TRUE(tensor(i2, i2).matrix().isApprox(Matrix::Identity(4, 4)));
  const Matrix zz = tensor(Operator(pauli::Z()), Operator(pauli::Z())).matrix();
  Matrix expect = Matrix::Zero(4, 4);
  expect.diagonal() << 1.0, -1.0, -1.0, 1.0;
  EXPECT_LT((zz - expect).norm(), 1e-15);
  const StateVector s = tensor(ket0(), ket1());
  EXPECT_EQ(s.dims(), (Dims{2, 2}));
  EXPECT_EQ(s[1], Complex(1.0));
}

TEST(PartialTrace, BranchingState) {
  // alpha |0>|E1> + beta |1>|E2> with orthogonal E states.
  const Complex alpha(0.6, 0.0), beta(0.0, 0.8);
  Vector psi = alpha * kron(ket0().amplitudes(), ket0().amplitudes()) + beta * kron(ket1().amplitudes(), ket1().amplitudes());
  const DensityMatrix rho = DensityMatrix::pure(StateVector(psi, {2, 2}));
  const DensityMatrix rs = partial_trace(rho, {0});
  EXPECT_NEAR(rs(0, 0).real(), 0.36, 1e-14);
  EXPECT_NEAR(rs(1, 1).real(), 0.64, 1e-14);
  EXPECT_LT(std::abs(rs(0, 1)), 1e-15);
}

TEST(PartialTrace, ProductAndOracle) {
  SplitMix64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const DensityMatrix a = random_density({2}, rng), b = random_density({3}, rng);
    const DensityMatrix ab = tensor(a, b);
    EXPECT_LT((partial_trace(ab, {0}).matrix() - a.matrix()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((partial_trace(ab, {1}).matrix() - b.matrix()).cwiseAbs().maxCoeff(), 1e-12);

    const DensityMatrix r = random_density({2, 2}, rng);
    EXPECT_LT((partial_trace(r.matrix(), {2, 2}, {0}) - trace_out_second(r.matrix(), 2, 2)).norm(), 1e-13);
    EXPECT_LT((partial_trace(r.matrix(), {2, 2}, {1}) - trace_out_first(r.matrix(), 2, 2)).norm(), 1e-13);
    EXPECT_NEAR(partial_trace(r, {1}).matrix().trace().real(), 1.0, 1e-12);
  }
  EXPECT_THROW(partial_trace(DensityMatrix::maximally_mixed({2, 2}), {2}), std::out_of_range);
}

TEST(PartialTrace, ThreeFactorsAgainstPureReduction) {
  SplitMix64 rng(11);
  const StateVector psi = random_state({2, 3, 2}, rng);
  const DensityMatrix rho = DensityMatrix::pure(psi);
  for (const auto& keep : std::vector<std::vector<std::size_t>>{{0}, {1}, {2}, {0, 2}, {1, 2}}) {
    EXPECT_LT((partial_trace(rho, keep).matrix() - reduce_pure(psi, keep).matrix()).norm(), 1e-13);
  }
}

TEST(Overlap, Examples) {
  SplitMix64 rng(3);
  const StateVector a = random_state({2}, rng), b = random_state({2}, rng);
  EXPECT_NEAR(std::abs(overlap(a, a) - 1.0), 0.0, 1e-14);
  EXPECT_EQ(overlap(ket0(), ket1()), Complex(0.0));
  const Complex oracle = std::conj(a[0]) * b[0] + std::conj(a[1]) * b[1];
  EXPECT_LT(std::abs(overlap(a, b) - oracle), 1e-15);
  EXPECT_THROW(overlap(a, random_state({3}, rng)), std::invalid_argument);
  for (int i = 0; i < 50; ++i) {
    EXPECT_LE(std::norm(overlap(random_state({4}, rng), random_state({4}, rng))), 1.0 + 1e-12);
  }
}

TEST(Measures, PurityEntropy) {
  EXPECT_NEAR(purity(DensityMatrix::pure(ket_plus())), 1.0, 1e-14);
  EXPECT_NEAR(entropy(DensityMatrix::pure(ket_plus())), 0.0, 1e-12);
  EXPECT_NEAR(purity(DensityMatrix::maximally_mixed({2})), 0.5, 1e-14);
  EXPECT_NEAR(entropy(DensityMatrix::maximally_mixed({2})), 1.0, 1e-12);
  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 0.75, 0.25;
  EXPECT_NEAR(entropy(DensityMatrix(d)), 2.0 - 0.75 * std::log2(3.0), 1e-12);
}

TEST(Measures, PurityFromEigenvalues) {
  SplitMix64 rng(5);
  for (int i = 0; i < 20; ++i) {
    const DensityMatrix r = random_density({4}, rng);
    const RealVector ev = hermitian_eigenvalues(r.matrix());
    EXPECT_NEAR(purity(r), ev.squaredNorm(), 1e-10);
    EXPECT_GE(purity(r), 0.25 - 1e-12);
    EXPECT_LE(entropy(r), 2.0 + 1e-12);
  }
}

TEST(Measures, MutualInformation) {
  SplitMix64 rng(9);
  EXPECT_NEAR(mutual_information(tensor(random_density({2}, rng), random_density({2}, rng)), {0}), 0.0, 1e-10);
  Vector bell = Vector::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  const DensityMatrix b = DensityMatrix::pure(StateVector(bell, {2, 2}));
  EXPECT_NEAR(mutual_information(b, {0}), 2.0, 1e-10);
  // branching state, orthogonal records, |alpha|^2 = 1/2, environment of dimension 3
  Vector psi = Vector::Zero(6);
  psi(0) = 1.0 / std::sqrt(2.0);  // |0>|E1=0>
  psi(5) = Complex(0.0, 1.0) / std::sqrt(2.0);  // |1>|E2=2>
  EXPECT_NEAR(mutual_information(DensityMatrix::pure(StateVector(psi, {2, 3})), {0}), 2.0, 1e-10);
  for (int i = 0; i < 20; ++i) {
    const DensityMatrix r = random_density({2, 3}, rng);
    const double i01 = mutual_information(r, {0});
    EXPECT_NEAR(i01, mutual_information(r, {1}), 1e-10);
    EXPECT_GE(i01, -1e-9);
    EXPECT_LE(i01, 2.0 + 1e-9);
  }
}

TEST(Eigenspaces, ClustersDegenerateValues) {
  Matrix h = Matrix::Zero(4, 4);
  h.diagonal() << 2.0, 0.0, 0.0, -2.0;
  const auto spaces = eigenspaces(h, 1e-9);
  ASSERT_EQ(spaces.size(), 3u);
  std::vector<Eigen::Index> dims;
  for (const auto& s : spaces) dims.push_back(s.basis.cols());
  std::sort(dims.begin(), dims.end());
  EXPECT_EQ(dims, (std::vector<Eigen::Index>{1, 1, 2}));
}

TEST(Embed, MatchesKron) {
  const Dims dims{2, 3, 2};
  const Matrix e = embed(pauli::X(), 2, dims);
  EXPECT_LT((e - kron_all({pauli::I(), Matrix::Identity(3, 3), pauli::X()})).norm(), 1e-15);
}
