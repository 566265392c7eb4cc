#pragma once

// Finite-dimensional Hilbert-space primitives: states, operators, composition,
// reduction and information measures. Units: hbar = k_B = 1.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace decoherence {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Dims = std::vector<std::size_t>;

inline constexpr Complex kI{0.0, 1.0};

/// Raised when a numerical contract is violated at run time (positivity loss,
/// non-convergent quadrature, completeness failure). Distinct from bad input,
/// which is reported with std::invalid_argument.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace tolerance {
inline constexpr double kNorm = 1e-12;
inline constexpr double kHermitian = 1e-10;
inline constexpr double kTrace = 1e-10;
inline constexpr double kPositivity = 1e-8;
}  // namespace tolerance

namespace detail {

inline std::size_t product(const Dims& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

inline Dims concat(const Dims& a, const Dims& b) {
  Dims out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

inline void check_dims(const Dims& dims, std::size_t size, const char* what) {
  if (dims.empty() || product(dims) != size) {
    std::ostringstream msg;
    msg << what << ": product of dims does not match size " << size;
    throw std::invalid_argument(msg.str());
  }
}

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// Row-major strides of a tensor-product index.
inline std::vector<std::size_t> strides(const Dims& dims) {
  std::vector<std::size_t> s(dims.size(), 1);
  for (std::size_t k = dims.size(); k-- > 1;) s[k - 1] = s[k] * dims[k];
  return s;
}

/// Splits every full index into (index over `keep` factors, index over the rest).
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    const Dims& dims, const std::vector<std::size_t>& keep) {
  const auto full_strides = strides(dims);
  std::vector<bool> kept(dims.size(), false);
  for (auto k : keep) kept[k] = true;
  const std::size_t total = product(dims);
  std::vector<std::size_t> keep_idx(total, 0), rest_idx(total, 0);
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t ki = 0, ri = 0;
    for (std::size_t f = 0; f < dims.size(); ++f) {
      const std::size_t digit = (i / full_strides[f]) % dims[f];
      if (kept[f]) {
        ki = ki * dims[f] + digit;
      } else {
        ri = ri * dims[f] + digit;
      }
    }
    keep_idx[i] = ki;
    rest_idx[i] = ri;
  }
  return {std::move(keep_idx), std::move(rest_idx)};
}

inline std::vector<std::size_t> normalized_keep(const Dims& dims, std::vector<std::size_t> keep) {
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  for (auto k : keep) {
    if (k >= dims.size()) throw std::out_of_range("factor index out of range");
  }
  return keep;
}

}  // namespace detail

/// Averages a matrix with its adjoint. Used by integrators; validators never
/// call it implicitly.
inline Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

inline Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }
inline Matrix anticommutator(const Matrix& a, const Matrix& b) { return a * b + b * a; }

/// Eigenvalues (ascending) of the Hermitian part of `m`.
inline RealVector hermitian_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(m), Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

inline double hermiticity_defect(const Matrix& m) { return detail::max_abs(m - m.adjoint()); }

inline bool is_unitary(const Matrix& u, double tol = 1e-10) {
  if (u.rows() != u.cols()) return false;
  return detail::max_abs(u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())) <= tol;
}

class StateVector {
 public:
  StateVector(Vector amplitudes, Dims dims) : amps_(std::move(amplitudes)), dims_(std::move(dims)) {
    detail::check_dims(dims_, static_cast<std::size_t>(amps_.size()), "StateVector");
    if (std::abs(amps_.norm() - 1.0) > tolerance::kNorm) {
      throw std::invalid_argument("StateVector: amplitudes are not normalized");
    }
  }

  explicit StateVector(Vector amplitudes)
      : StateVector(amplitudes, Dims{static_cast<std::size_t>(amplitudes.size())}) {}

  /// Normalizes before validating. Rejects the zero vector.
  static StateVector normalized(Vector amplitudes, Dims dims) {
    const double n = amplitudes.norm();
    if (n == 0.0) throw std::invalid_argument("StateVector: zero vector");
    return StateVector(amplitudes / n, std::move(dims));
  }

  static StateVector basis(Dims dims, std::size_t index) {
    const std::size_t d = detail::product(dims);
    if (index >= d) throw std::out_of_range("StateVector::basis: index out of range");
    Vector v = Vector::Zero(static_cast<Eigen::Index>(d));
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return StateVector(std::move(v), std::move(dims));
  }

  const Vector& amplitudes() const { return amps_; }
  const Dims& dims() const { return dims_; }
  std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
  Complex operator[](std::size_t i) const { return amps_(static_cast<Eigen::Index>(i)); }

 private:
  Vector amps_;
  Dims dims_;
};

class Operator {
 public:
  Operator(Matrix entries, Dims dims) : m_(std::move(entries)), dims_(std::move(dims)) {
    if (m_.rows() != m_.cols()) throw std::invalid_argument("Operator: matrix is not square");
    detail::check_dims(dims_, static_cast<std::size_t>(m_.rows()), "Operator");
  }

  explicit Operator(Matrix entries)
      : Operator(entries, Dims{static_cast<std::size_t>(entries.rows())}) {}

  static Operator identity(Dims dims) {
    const auto d = static_cast<Eigen::Index>(detail::product(dims));
    return Operator(Matrix::Identity(d, d), std::move(dims));
  }

  const Matrix& matrix() const { return m_; }
  const Dims& dims() const { return dims_; }
  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }

 private:
  Matrix m_;
  Dims dims_;
};

class DensityMatrix {
 public:
  /// Validates Hermiticity, unit trace and numerical positivity.
  DensityMatrix(Matrix entries, Dims dims) : m_(std::move(entries)), dims_(std::move(dims)) {
    if (m_.rows() != m_.cols()) throw std::invalid_argument("DensityMatrix: not square");
    detail::check_dims(dims_, static_cast<std::size_t>(m_.rows()), "DensityMatrix");
    const double herm = hermiticity_defect(m_);
    if (herm > tolerance::kHermitian) {
      throw std::invalid_argument("DensityMatrix: not Hermitian (defect " + std::to_string(herm) + ")");
    }
    const double tr_err = std::abs(m_.trace() - 1.0);
    if (tr_err > tolerance::kTrace) {
      throw std::invalid_argument("DensityMatrix: trace differs from 1 by " + std::to_string(tr_err));
    }
    const double min_eig = hermitian_eigenvalues(m_).minCoeff();
    if (min_eig < -tolerance::kPositivity) {
      throw std::invalid_argument("DensityMatrix: negative eigenvalue " + std::to_string(min_eig));
    }
  }

  explicit DensityMatrix(Matrix entries)
      : DensityMatrix(entries, Dims{static_cast<std::size_t>(entries.rows())}) {}

  static DensityMatrix pure(const StateVector& psi) {
    return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint(), psi.dims());
  }

  static DensityMatrix maximally_mixed(Dims dims) {
    const auto d = static_cast<Eigen::Index>(detail::product(dims));
    return DensityMatrix(Matrix::Identity(d, d) / static_cast<double>(d), std::move(dims));
  }

  const Matrix& matrix() const { return m_; }
  const Dims& dims() const { return dims_; }
  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  Complex operator()(std::size_t i, std::size_t j) const {
    return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

 private:
  Matrix m_;
  Dims dims_;
};

// ---------------------------------------------------------------------------
// Composition

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline Vector kron(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

inline Operator tensor(const Operator& a, const Operator& b) {
  return Operator(kron(a.matrix(), b.matrix()), detail::concat(a.dims(), b.dims()));
}

inline StateVector tensor(const StateVector& a, const StateVector& b) {
  return StateVector(kron(a.amplitudes(), b.amplitudes()), detail::concat(a.dims(), b.dims()));
}

inline DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix(kron(a.matrix(), b.matrix()), detail::concat(a.dims(), b.dims()));
}

/// Kronecker product of a list of matrices, left to right.
inline Matrix kron_all(const std::vector<Matrix>& factors) {
  Matrix out = Matrix::Identity(1, 1);
  for (const auto& f : factors) out = kron(out, f);
  return out;
}

/// Embeds a single-factor operator at position `site` of a tensor product.
inline Matrix embed(const Matrix& op, std::size_t site, const Dims& dims) {
  std::vector<Matrix> factors;
  factors.reserve(dims.size());
  for (std::size_t k = 0; k < dims.size(); ++k) {
    const auto d = static_cast<Eigen::Index>(dims[k]);
    factors.push_back(k == site ? op : Matrix::Identity(d, d));
  }
  return kron_all(factors);
}

// ---------------------------------------------------------------------------
// Reduction

/// Partial trace of a raw matrix over every factor not listed in `keep`.
/// Kept factors retain their original order.
inline Matrix partial_trace(const Matrix& rho, const Dims& dims, std::vector<std::size_t> keep) {
  keep = detail::normalized_keep(dims, std::move(keep));
  detail::check_dims(dims, static_cast<std::size_t>(rho.rows()), "partial_trace");
  Dims kept_dims;
  for (auto k : keep) kept_dims.push_back(dims[k]);
  const std::size_t dk = detail::product(kept_dims);
  const std::size_t dr = detail::product(dims) / dk;
  const auto [keep_idx, rest_idx] = detail::split_indices(dims, keep);

  // Group full indices by their traced-out digit.
  std::vector<std::vector<std::size_t>> by_rest(dr);
  for (std::size_t i = 0; i < keep_idx.size(); ++i) by_rest[rest_idx[i]].push_back(i);

  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
  for (const auto& group : by_rest) {
    for (auto i : group) {
      for (auto j : group) {
        out(static_cast<Eigen::Index>(keep_idx[i]), static_cast<Eigen::Index>(keep_idx[j])) +=
            rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
    }
  }
  return out;
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<std::size_t>& keep) {
  const auto sorted = detail::normalized_keep(rho.dims(), keep);
  Dims kept_dims;
  for (auto k : sorted) kept_dims.push_back(rho.dims()[k]);
  return DensityMatrix(symmetrize(partial_trace(rho.matrix(), rho.dims(), sorted)), kept_dims);
}

/// Reduced state of a pure state over `keep`, via the reshaped amplitude matrix.
inline Matrix reduce_pure(const Vector& psi, const Dims& dims, std::vector<std::size_t> keep) {
  keep = detail::normalized_keep(dims, std::move(keep));
  Dims kept_dims;
  for (auto k : keep) kept_dims.push_back(dims[k]);
  const std::size_t dk = detail::product(kept_dims);
  const std::size_t dr = detail::product(dims) / dk;
  const auto [keep_idx, rest_idx] = detail::split_indices(dims, keep);
  Matrix amp = Matrix::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dr));
  for (std::size_t i = 0; i < keep_idx.size(); ++i) {
    amp(static_cast<Eigen::Index>(keep_idx[i]), static_cast<Eigen::Index>(rest_idx[i])) =
        psi(static_cast<Eigen::Index>(i));
  }
  return amp * amp.adjoint();
}

inline DensityMatrix reduce_pure(const StateVector& psi, const std::vector<std::size_t>& keep) {
  const auto sorted = detail::normalized_keep(psi.dims(), keep);
  Dims kept_dims;
  for (auto k : sorted) kept_dims.push_back(psi.dims()[k]);
  return DensityMatrix(symmetrize(reduce_pure(psi.amplitudes(), psi.dims(), sorted)), kept_dims);
}

// ---------------------------------------------------------------------------
// Measures

inline Complex overlap(const StateVector& e1, const StateVector& e2) {
  if (e1.dim() != e2.dim() || e1.dims() != e2.dims()) {
    throw std::invalid_argument("overlap: dimension mismatch");
  }
  return e1.amplitudes().dot(e2.amplitudes());  // conjugates the first argument
}

inline double purity(const Matrix& rho) { return (rho * rho).trace().real(); }

inline double purity(const DensityMatrix& rho) { return purity(rho.matrix()); }

/// Von Neumann entropy in bits of the Hermitian part of `rho`. Eigenvalues
/// above -1e-8 are clipped at zero; anything more negative is rejected.
inline double entropy(const Matrix& rho) {
  if (hermiticity_defect(rho) > tolerance::kHermitian) {
    throw std::invalid_argument("entropy: non-Hermitian input");
  }
  const RealVector evals = hermitian_eigenvalues(rho);
  double s = 0.0;
  for (Eigen::Index i = 0; i < evals.size(); ++i) {
    double p = evals(i);
    if (p < -tolerance::kPositivity) throw std::invalid_argument("entropy: negative eigenvalue");
    if (p <= 0.0) continue;
    s -= p * std::log2(p);
  }
  return s;
}

inline double entropy(const DensityMatrix& rho) { return entropy(rho.matrix()); }

/// S(A) + S(B) - S(AB) in bits, where A are the factors listed in `cut` and B
/// the remaining ones.
inline double mutual_information(const DensityMatrix& rho, const std::vector<std::size_t>& cut) {
  const auto a = detail::normalized_keep(rho.dims(), cut);
  if (a.empty() || a.size() == rho.dims().size()) {
    throw std::invalid_argument("mutual_information: cut must be a proper nonempty subset");
  }
  std::vector<std::size_t> b;
  for (std::size_t k = 0; k < rho.dims().size(); ++k) {
    if (!std::binary_search(a.begin(), a.end(), k)) b.push_back(k);
  }
  return entropy(partial_trace(rho.matrix(), rho.dims(), a)) +
         entropy(partial_trace(rho.matrix(), rho.dims(), b)) - entropy(rho.matrix());
}

/// Half the trace norm of the difference.
inline double trace_distance(const Matrix& a, const Matrix& b) {
  return 0.5 * hermitian_eigenvalues(a - b).cwiseAbs().sum();
}

inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  return trace_distance(a.matrix(), b.matrix());
}

/// <psi|rho|psi>.
inline double fidelity(const StateVector& psi, const Matrix& rho) {
  return (psi.amplitudes().adjoint() * rho * psi.amplitudes())(0, 0).real();
}

// ---------------------------------------------------------------------------
// Common operators

namespace pauli {
inline Matrix I() { return Matrix::Identity(2, 2); }
inline Matrix X() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
inline Matrix Y() {
  Matrix m(2, 2);
  m << 0, -kI, kI, 0;
  return m;
}
inline Matrix Z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}
/// sigma_- = |1><0| in the convention sigma_z|0> = |0>.
inline Matrix lowering() {
  Matrix m = Matrix::Zero(2, 2);
  m(1, 0) = 1.0;
  return m;
}
}  // namespace pauli

inline StateVector ket0() { return StateVector::basis({2}, 0); }
inline StateVector ket1() { return StateVector::basis({2}, 1); }
inline StateVector ket_plus() {
  Vector v(2);
  v << 1.0, 1.0;
  return StateVector(v / std::sqrt(2.0), {2});
}
inline StateVector ket_minus() {
  Vector v(2);
  v << 1.0, -1.0;
  return StateVector(v / std::sqrt(2.0), {2});
}

/// Qubit state cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>.
inline StateVector bloch_state(double theta, double phi) {
  Vector v(2);
  v << std::cos(theta / 2), std::polar(1.0, phi) * std::sin(theta / 2);
  return StateVector(v, {2});
}

/// Hermitian eigendecomposition with eigenvalues clustered into degenerate
/// groups. Two neighbouring eigenvalues belong to the same group when their
/// gap is at most `tol`.
struct Eigenspace {
  double value;
  Matrix basis;  // orthonormal columns
};

inline std::vector<Eigenspace> eigenspaces(const Matrix& h, double tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(h));
  const RealVector& evals = solver.eigenvalues();
  const Matrix& evecs = solver.eigenvectors();
  std::vector<Eigenspace> out;
  Eigen::Index start = 0;
  for (Eigen::Index i = 1; i <= evals.size(); ++i) {
    if (i == evals.size() || evals(i) - evals(i - 1) > tol) {
      out.push_back({evals.segment(start, i - start).mean(), evecs.middleCols(start, i - start)});
      start = i;
    }
  }
  return out;
}

}  // namespace decoherence
