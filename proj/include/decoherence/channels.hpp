#pragma once

// Operator-sum (Kraus) channels built from unitary dilations, and the
// indirect-measurement picture of environmental monitoring.

#include "decoherence/core.hpp"

#include <optional>

namespace decoherence {

class KrausChannel {
 public:
  KrausChannel(std::vector<Matrix> operators, std::size_t dim)
      : ops_(std::move(operators)), dim_(dim) {
    for (const auto& w : ops_) {
      if (static_cast<std::size_t>(w.rows()) != dim_ || w.rows() != w.cols()) {
        throw std::invalid_argument("KrausChannel: operator dimension mismatch");
      }
    }
  }

  static KrausChannel identity(std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    return KrausChannel({Matrix::Identity(d, d)}, dim);
  }

  const std::vector<Matrix>& operators() const { return ops_; }
  std::size_t dim() const { return dim_; }

 private:
  std::vector<Matrix> ops_;
  std::size_t dim_;
};

namespace detail {
inline constexpr double kPruneNorm = 1e-12;
inline constexpr double kCompleteness = 1e-9;
}  // namespace detail

/// Max entrywise |sum_k W_k^dag W_k - I|.
inline double verify_completeness(const KrausChannel& ch) {
  const auto d = static_cast<Eigen::Index>(ch.dim());
  Matrix sum = Matrix::Zero(d, d);
  for (const auto& w : ch.operators()) sum += w.adjoint() * w;
  return detail::max_abs(sum - Matrix::Identity(d, d));
}

/// <e_row| U |e_col> as a system operator, for U acting on S (x) E with S first.
inline Matrix environment_element(const Matrix& u, std::size_t dim_s, const Vector& bra, const Vector& ket) {
  const auto ds = static_cast<Eigen::Index>(dim_s);
  const Eigen::Index de = bra.size();
  Matrix out = Matrix::Zero(ds, ds);
  for (Eigen::Index a = 0; a < ds; ++a) {
    for (Eigen::Index b = 0; b < ds; ++b) {
      Complex acc = 0.0;
      for (Eigen::Index j = 0; j < de; ++j) {
        const Complex bj = std::conj(bra(j));
        if (bj == Complex(0.0)) continue;
        for (Eigen::Index e = 0; e < de; ++e) acc += bj * u(a * de + j, b * de + e) * ket(e);
      }
      out(a, b) = acc;
    }
  }
  return out;
}

/// W_k = sqrt(p_i) <E_j| U |E_i>, with |E_i> the eigenbasis of rho_E and <E_j|
/// the computational basis of E. Operators with Frobenius norm < 1e-12 are
/// dropped.
inline KrausChannel kraus_from_unitary(const Operator& u, const DensityMatrix& rho_env) {
  if (!is_unitary(u.matrix())) throw std::invalid_argument("kraus_from_unitary: U is not unitary");
  const std::size_t de = rho_env.dim();
  if (u.dim() % de != 0) throw std::invalid_argument("kraus_from_unitary: dimension mismatch");
  const std::size_t ds = u.dim() / de;

  Eigen::SelfAdjointEigenSolver<Matrix> solver(rho_env.matrix());
  std::vector<Matrix> ops;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(de); ++i) {
    const double p = std::max(solver.eigenvalues()(i), 0.0);
    if (p == 0.0) continue;
    const Vector env_i = solver.eigenvectors().col(i);
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(de); ++j) {
      Vector env_j = Vector::Zero(static_cast<Eigen::Index>(de));
      env_j(j) = 1.0;
      Matrix w = std::sqrt(p) * environment_element(u.matrix(), ds, env_j, env_i);
      if (w.norm() >= detail::kPruneNorm) ops.push_back(std::move(w));
    }
  }
  return KrausChannel(std::move(ops), ds);
}

/// sum_k W_k rho W_k^dag without validating the output.
inline Matrix apply_kraus(const std::vector<Matrix>& ops, const Matrix& rho) {
  Matrix out = Matrix::Zero(rho.rows(), rho.cols());
  for (const auto& w : ops) out += w * rho * w.adjoint();
  return out;
}

/// Applies the channel. A completeness residual above 1e-9 raises
/// numerical_error carrying the residual.
inline DensityMatrix apply_channel(const KrausChannel& ch, const DensityMatrix& rho) {
  if (rho.dim() != ch.dim()) throw std::invalid_argument("apply_channel: dimension mismatch");
  const double residual = verify_completeness(ch);
  if (residual > detail::kCompleteness) {
    throw numerical_error("apply_channel: completeness residual " + std::to_string(residual));
  }
  return DensityMatrix(symmetrize(apply_kraus(ch.operators(), rho.matrix())), rho.dims());
}

/// Tr_E{ U (rho_S (x) rho_E) U^dag } by direct dilation.
inline Matrix dilate_and_trace(const Matrix& u, const Matrix& rho_s, const Matrix& rho_e) {
  const Matrix joint = u * kron(rho_s, rho_e) * u.adjoint();
  return partial_trace(joint, {static_cast<std::size_t>(rho_s.rows()), static_cast<std::size_t>(rho_e.rows())},
                       {0});
}

/// Measurement operators M_{alpha,k} = sqrt(p_k) <alpha_r| U |E_k>, one list per
/// outcome alpha. Projectors of rank > 1 contribute one operator per vector of
/// their range.
class IndirectMeasurement {
 public:
  IndirectMeasurement(const Operator& u, const DensityMatrix& rho_env, const std::vector<Matrix>& projectors) {
    const std::size_t de = rho_env.dim();
    if (u.dim() % de != 0) throw std::invalid_argument("IndirectMeasurement: dimension mismatch");
    dim_ = u.dim() / de;
    check_projectors(projectors, de);

    Eigen::SelfAdjointEigenSolver<Matrix> env(rho_env.matrix());
    for (const auto& p : projectors) {
      std::vector<Matrix> ops;
      Eigen::SelfAdjointEigenSolver<Matrix> range(symmetrize(p));
      for (Eigen::Index r = 0; r < range.eigenvalues().size(); ++r) {
        if (range.eigenvalues()(r) < 0.5) continue;
        const Vector alpha = range.eigenvectors().col(r);
        for (Eigen::Index k = 0; k < env.eigenvalues().size(); ++k) {
          const double pk = std::max(env.eigenvalues()(k), 0.0);
          if (pk == 0.0) continue;
          Matrix m = std::sqrt(pk) * environment_element(u.matrix(), dim_, alpha, env.eigenvectors().col(k));
          if (m.norm() >= detail::kPruneNorm) ops.push_back(std::move(m));
        }
      }
      operators_.push_back(std::move(ops));
    }
  }

  const std::vector<std::vector<Matrix>>& operators() const { return operators_; }
  std::size_t dim() const { return dim_; }

  /// Max entrywise |sum_{alpha,k} M^dag M - I|.
  double completeness_residual() const {
    const auto d = static_cast<Eigen::Index>(dim_);
    Matrix sum = Matrix::Zero(d, d);
    for (const auto& outcome : operators_) {
      for (const auto& m : outcome) sum += m.adjoint() * m;
    }
    return detail::max_abs(sum - Matrix::Identity(d, d));
  }

 private:
  static void check_projectors(const std::vector<Matrix>& projectors, std::size_t de) {
    if (projectors.empty()) throw std::invalid_argument("indirect_measurement: no projectors");
    const auto d = static_cast<Eigen::Index>(de);
    Matrix sum = Matrix::Zero(d, d);
    for (std::size_t a = 0; a < projectors.size(); ++a) {
      const Matrix& p = projectors[a];
      if (p.rows() != d || p.cols() != d) throw std::invalid_argument("indirect_measurement: projector dimension");
      if (detail::max_abs(p * p - p) > 1e-10 || hermiticity_defect(p) > 1e-10) {
        throw std::invalid_argument("indirect_measurement: operator is not an orthogonal projector");
      }
      for (std::size_t b = a + 1; b < projectors.size(); ++b) {
        if (detail::max_abs(p * projectors[b]) > 1e-10) {
          throw std::invalid_argument("indirect_measurement: projectors are not mutually orthogonal");
        }
      }
      sum += p;
    }
    if (detail::max_abs(sum - Matrix::Identity(d, d)) > 1e-10) {
      throw std::invalid_argument("indirect_measurement: incomplete projector set");
    }
  }

  std::size_t dim_ = 0;
  std::vector<std::vector<Matrix>> operators_;
};

struct MeasurementBranch {
  double probability;
  /// Empty when the outcome has zero probability.
  std::optional<DensityMatrix> state;
};

/// Outcome probabilities and conditional system states after measuring the
/// environment with `projectors` once U has acted on rho_S (x) rho_E.
inline std::vector<MeasurementBranch> indirect_measurement(const Operator& u, const DensityMatrix& rho_s,
                                                           const DensityMatrix& rho_env,
                                                           const std::vector<Matrix>& projectors) {
  if (u.dim() != rho_s.dim() * rho_env.dim()) {
    throw std::invalid_argument("indirect_measurement: dimension mismatch");
  }
  const IndirectMeasurement meas(u, rho_env, projectors);
  std::vector<MeasurementBranch> out;
  for (const auto& ops : meas.operators()) {
    const Matrix unnormalized = apply_kraus(ops, rho_s.matrix());
    const double p = unnormalized.trace().real();
    if (p <= 1e-14) {
      out.push_back({std::max(p, 0.0), std::nullopt});
    } else {
      out.push_back({p, DensityMatrix(symmetrize(unnormalized / p), rho_s.dims())});
    }
  }
  return out;
}

}  // namespace decoherence
