#pragma once

// Pointer states, decoherence-free subspaces and the commutativity criterion
// for interactions H_int = sum_a S_a (x) E_a.

#include "decoherence/core.hpp"
#include "decoherence/random.hpp"

#include <bit>
#include <cstdint>
#include <numbers>
#include <optional>

namespace decoherence {

struct InteractionTerm {
  Matrix s;  // system operator
  Matrix e;  // environment operator
};

class InteractionSpec {
 public:
  InteractionSpec(std::vector<InteractionTerm> terms, std::optional<Matrix> h_s = std::nullopt,
                  std::optional<Matrix> h_e = std::nullopt)
      : terms_(std::move(terms)), h_s_(std::move(h_s)), h_e_(std::move(h_e)) {
    if (terms_.empty()) throw std::invalid_argument("InteractionSpec: no terms");
    ds_ = terms_.front().s.rows();
    de_ = terms_.front().e.rows();
    for (const auto& t : terms_) {
      if (t.s.rows() != ds_ || t.s.cols() != ds_) throw std::invalid_argument("InteractionSpec: system dimension mismatch");
      if (t.e.rows() != de_ || t.e.cols() != de_) throw std::invalid_argument("InteractionSpec: environment dimension mismatch");
    }
    if (h_s_ && (h_s_->rows() != ds_ || h_s_->cols() != ds_)) throw std::invalid_argument("InteractionSpec: H_S dimension");
    if (h_e_ && (h_e_->rows() != de_ || h_e_->cols() != de_)) throw std::invalid_argument("InteractionSpec: H_E dimension");
  }

  const std::vector<InteractionTerm>& terms() const { return terms_; }
  std::size_t system_dim() const { return static_cast<std::size_t>(ds_); }
  std::size_t environment_dim() const { return static_cast<std::size_t>(de_); }
  const std::optional<Matrix>& system_hamiltonian() const { return h_s_; }

  Matrix interaction() const {
    Matrix h = Matrix::Zero(ds_ * de_, ds_ * de_);
    for (const auto& t : terms_) h += kron(t.s, t.e);
    return h;
  }

  /// H_int plus H_S (x) I and I (x) H_E when present.
  Matrix total() const {
    Matrix h = interaction();
    if (h_s_) h += kron(*h_s_, Matrix::Identity(de_, de_));
    if (h_e_) h += kron(Matrix::Identity(ds_, ds_), *h_e_);
    return h;
  }

  void require_hermitian() const {
    for (const auto& t : terms_) {
      if (hermiticity_defect(t.s) > tolerance::kHermitian) {
        throw std::invalid_argument("InteractionSpec: only Hermitian system operators are supported");
      }
    }
  }

 private:
  std::vector<InteractionTerm> terms_;
  std::optional<Matrix> h_s_, h_e_;
  Eigen::Index ds_ = 0, de_ = 0;
};

/// ||[O_S (x) I, H_int]||_F / (||O_S||_F ||H_int||_F); 0 when either norm vanishes.
inline double commutativity_residual(const Matrix& o_s, const InteractionSpec& spec) {
  if (static_cast<std::size_t>(o_s.rows()) != spec.system_dim()) {
    throw std::invalid_argument("commutativity_residual: dimension mismatch");
  }
  const auto de = static_cast<Eigen::Index>(spec.environment_dim());
  const Matrix h = spec.interaction();
  const double denom = o_s.norm() * h.norm();
  if (denom == 0.0) return 0.0;
  const Matrix o = kron(o_s, Matrix::Identity(de, de));
  return commutator(o, h).norm() / denom;
}

/// A joint eigenspace of all S_a with its eigenvalue tuple.
struct JointEigenspace {
  Matrix basis;  // orthonormal columns
  std::vector<double> eigenvalues;
};

namespace detail {

/// Orthonormal basis of the null space of m (columns), via SVD with a
/// relative threshold.
inline Matrix null_space(const Matrix& m, double tol) {
  if (m.cols() == 0) return Matrix(m.cols(), 0);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol) ++rank;
  }
  return svd.matrixV().rightCols(m.cols() - rank);
}

inline double spectral_norm_of(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

/// Refines subspace `v` (orthonormal columns) into the joint eigenspaces of
/// terms [k, end), appending every nonempty leaf to `out`.
inline void refine(const std::vector<InteractionTerm>& terms, std::size_t k, const Matrix& v,
                   std::vector<double>& values, std::vector<JointEigenspace>& out) {
  if (v.cols() == 0) return;
  if (k == terms.size()) {
    out.push_back({v, values});
    return;
  }
  const Matrix& s = terms[k].s;
  const double scale = std::max(spectral_norm_of(s), 1e-300);
  const double tol = 1e-9 * scale;
  const Matrix compressed = v.adjoint() * s * v;
  const Matrix outside = Matrix::Identity(v.rows(), v.rows()) - v * v.adjoint();
  for (const auto& space : eigenspaces(compressed, tol)) {
    // Keep only combinations that S does not map out of span(v).
    const Matrix leak = outside * s * v * space.basis;
    const Matrix keep = null_space(leak, 1e-8 * scale);
    if (keep.cols() == 0) continue;
    Matrix w = v * space.basis * keep;
    Eigen::HouseholderQR<Matrix> qr(w);
    w = qr.householderQ() * Matrix::Identity(w.rows(), w.cols());
    values.push_back(space.value);
    refine(terms, k + 1, w, values, out);
    values.pop_back();
  }
}

/// Rewrites sum_k S_k (x) E_k over linearly independent environment
/// operators when the Hermitian E_k are dependent, so that splitting one
/// coupling into several terms does not change the answer. Independent terms
/// are returned unchanged.
inline std::vector<InteractionTerm> independent_terms(const std::vector<InteractionTerm>& terms) {
  const auto k = static_cast<Eigen::Index>(terms.size());
  for (const auto& t : terms) {
    if (hermiticity_defect(t.e) > tolerance::kHermitian) return terms;
  }
  const Eigen::Index n = terms.front().e.size();
  // real coordinates of each Hermitian E_k
  Eigen::MatrixXd m(2 * n, k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const Eigen::Map<const Vector> v(terms[static_cast<std::size_t>(c)].e.data(), n);
    m.col(c) << v.real(), v.imag();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > 1e-10 * sv(0)) ++rank;
  }
  if (rank == k) return terms;
  // E_k = sum_m F_m sigma_m V_km, F_m from the left singular vectors
  const Eigen::Index de = terms.front().e.rows();
  std::vector<InteractionTerm> out;
  for (Eigen::Index r = 0; r < rank; ++r) {
    const Eigen::VectorXd u = svd.matrixU().col(r);
    Matrix f(de, de);
    Eigen::Map<Vector>(f.data(), n) = u.head(n).cast<Complex>() + kI * u.tail(n).cast<Complex>();
    Matrix s = Matrix::Zero(terms.front().s.rows(), terms.front().s.cols());
    for (Eigen::Index c = 0; c < k; ++c) s += sv(r) * svd.matrixV()(c, r) * terms[static_cast<std::size_t>(c)].s;
    out.push_back({symmetrize(s), symmetrize(f)});
  }
  return out;
}

}  // namespace detail

/// All joint eigenspaces of the S_a (recursive intersection of eigenspaces).
/// Eigenvalue tuples refer to the independent terms of detail::independent_terms.
inline std::vector<JointEigenspace> joint_eigenspaces(const InteractionSpec& spec) {
  spec.require_hermitian();
  const auto d = static_cast<Eigen::Index>(spec.system_dim());
  std::vector<JointEigenspace> out;
  std::vector<double> values;
  detail::refine(detail::independent_terms(spec.terms()), 0, Matrix::Identity(d, d), values, out);
  return out;
}

struct PointerState {
  StateVector state;
  std::vector<double> eigenvalues;
};

/// Simultaneous eigenvectors of every S_a, one orthonormal basis per joint
/// eigenspace. Empty when the S_a share no eigenvector.
inline std::vector<PointerState> pointer_states(const InteractionSpec& spec) {
  std::vector<PointerState> out;
  for (const auto& space : joint_eigenspaces(spec)) {
    for (Eigen::Index c = 0; c < space.basis.cols(); ++c) {
      out.push_back({StateVector::normalized(space.basis.col(c), {spec.system_dim()}), space.eigenvalues});
    }
  }
  return out;
}

struct DFSResult {
  std::vector<StateVector> basis;
  std::vector<double> eigenvalues;  // shared eigenvalue of each S_a
  std::size_t dimension = 0;

  Matrix projector(std::size_t dim) const {
    const auto d = static_cast<Eigen::Index>(dim);
    Matrix p = Matrix::Zero(d, d);
    for (const auto& b : basis) p += b.amplitudes() * b.amplitudes().adjoint();
    return p;
  }
};

/// Largest joint eigenspace. Ties go to the lexicographically largest
/// eigenvalue tuple.
inline DFSResult dfs_find(const InteractionSpec& spec) {
  const auto spaces = joint_eigenspaces(spec);
  const JointEigenspace* best = nullptr;
  for (const auto& s : spaces) {
    if (!best || s.basis.cols() > best->basis.cols() ||
        (s.basis.cols() == best->basis.cols() &&
         std::lexicographical_compare(best->eigenvalues.begin(), best->eigenvalues.end(), s.eigenvalues.begin(),
                                      s.eigenvalues.end()))) {
      best = &s;
    }
  }
  DFSResult r;
  if (!best) return r;
  r.eigenvalues = best->eigenvalues;
  r.dimension = static_cast<std::size_t>(best->basis.cols());
  for (Eigen::Index c = 0; c < best->basis.cols(); ++c) {
    r.basis.push_back(StateVector::normalized(best->basis.col(c), {spec.system_dim()}));
  }
  return r;
}

/// S_z = sum_j sz^(j) on n qubits (eigenvalues n - 2 * popcount).
inline Matrix collective_sz(std::size_t n) {
  const Dims dims(n, 2);
  const auto d = static_cast<Eigen::Index>(detail::product(dims));
  Matrix s = Matrix::Zero(d, d);
  for (Eigen::Index b = 0; b < d; ++b) {
    s(b, b) = static_cast<double>(n) - 2.0 * std::popcount(static_cast<std::uint64_t>(b));
  }
  return s;
}

inline double binomial(std::size_t n, std::size_t k) {
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

inline std::uint64_t binomial_exact(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;  // exact at every step
  return r;
}

struct CollectiveDFSReport {
  std::size_t n = 0;
  /// S_z eigenvalue of the reported class: 0 for even n, +1 for odd n.
  int magnetization = 0;
  /// Set for odd n, where S_z = 0 is empty and the largest class is reported instead.
  bool odd_n_fallback = false;
  std::uint64_t dimension = 0;
  double encodable_qubits = 0.0;  // log2(dimension)
  double efficiency = 0.0;        // log2(dimension) / n
  double stirling_bits = 0.0;     // n - (1/2) log2(pi n / 2)
  std::vector<std::string> labels;  // computational-basis labels, n <= 14 only
  DFSResult dfs;                    // explicit basis, n <= 14 only
};

/// Decoherence-free subspace of collective dephasing S_z (x) E: the computational
/// states with n/2 ones. Counting works for any n up to 62; bases for n <= 14.
inline CollectiveDFSReport collective_dfs(std::size_t n) {
  if (n == 0 || n > 62) throw std::invalid_argument("collective_dfs: n must be in [1, 62]");
  CollectiveDFSReport r;
  r.n = n;
  r.odd_n_fallback = n % 2 == 1;
  const std::size_t ones = n / 2;  // odd n: (n - 1) / 2 ones, magnetization +1
  r.magnetization = static_cast<int>(n) - 2 * static_cast<int>(ones);
  r.dimension = binomial_exact(n, ones);
  r.encodable_qubits = std::log2(static_cast<double>(r.dimension));
  r.efficiency = r.encodable_qubits / static_cast<double>(n);
  r.stirling_bits = static_cast<double>(n) - 0.5 * std::log2(std::numbers::pi * static_cast<double>(n) / 2.0);
  if (n <= 14) {
    const std::size_t d = std::size_t{1} << n;
    r.dfs.eigenvalues = {static_cast<double>(r.magnetization)};
    for (std::size_t b = 0; b < d; ++b) {
      if (static_cast<std::size_t>(std::popcount(static_cast<std::uint64_t>(b))) != ones) continue;
      std::string label;
      for (std::size_t i = 0; i < n; ++i) label += ((b >> (n - 1 - i)) & 1u) ? '1' : '0';
      r.labels.push_back(label);
      r.dfs.basis.push_back(StateVector::basis(Dims(n, 2), b));
    }
    r.dfs.dimension = r.dfs.basis.size();
  }
  return r;
}

/// Largest entanglement entropy (bits) between system and environment when
/// |psi> (x) |e0> evolves under exp(-i H_int t) at the given times.
inline double entanglement_certificate(const InteractionSpec& spec, const StateVector& psi, const StateVector& e0,
                                       const std::vector<double>& times) {
  const Matrix h = spec.interaction();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(h));
  const Vector joint = kron(psi.amplitudes(), e0.amplitudes());
  const Vector in_eig = eig.eigenvectors().adjoint() * joint;
  const Dims dims{spec.system_dim(), spec.environment_dim()};
  double worst = 0.0;
  for (double t : times) {
    Vector phased = in_eig;
    for (Eigen::Index i = 0; i < phased.size(); ++i) phased(i) *= std::polar(1.0, -eig.eigenvalues()(i) * t);
    const Vector out = eig.eigenvectors() * phased;
    worst = std::max(worst, entropy(symmetrize(reduce_pure(out, dims, {0}))));
  }
  return worst;
}

/// ||(I - P) H_S P||_F: how strongly the system Hamiltonian drives states out
/// of the subspace with projector P.
inline double subspace_drift(const Matrix& h_s, const Matrix& projector) {
  const Matrix q = Matrix::Identity(projector.rows(), projector.cols()) - projector;
  return (q * h_s * projector).norm();
}

}  // namespace decoherence
