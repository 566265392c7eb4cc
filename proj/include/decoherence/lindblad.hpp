#pragma once

// Lindblad generator, fixed-step evolution and the diffusive unraveling into
// stochastic pure-state trajectories.

#include "decoherence/core.hpp"
#include "decoherence/integrate.hpp"
#include "decoherence/random.hpp"

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

namespace decoherence {

struct LindbladTerm {
  Matrix op;
  double rate;  // kappa >= 0
};

class LindbladSpec {
 public:
  LindbladSpec(Matrix hamiltonian, std::vector<LindbladTerm> terms)
      : h_(std::move(hamiltonian)), terms_(std::move(terms)) {
    if (h_.rows() != h_.cols()) throw std::invalid_argument("LindbladSpec: Hamiltonian not square");
    if (hermiticity_defect(h_) > tolerance::kHermitian) {
      throw std::invalid_argument("LindbladSpec: Hamiltonian is not Hermitian");
    }
    for (const auto& term : terms_) {
      if (term.op.rows() != h_.rows() || term.op.cols() != h_.cols()) {
        throw std::invalid_argument("LindbladSpec: Lindblad operator dimension mismatch");
      }
      if (!(term.rate >= 0.0)) throw std::invalid_argument("LindbladSpec: negative rate");
      ldag_l_.push_back(term.op.adjoint() * term.op);
    }
  }

  const Matrix& hamiltonian() const { return h_; }
  const std::vector<LindbladTerm>& terms() const { return terms_; }
  std::size_t dim() const { return static_cast<std::size_t>(h_.rows()); }
  /// Precomputed L^dag L, aligned with terms().
  const std::vector<Matrix>& ldag_l() const { return ldag_l_; }

  bool hermitian_operators() const {
    return std::all_of(terms_.begin(), terms_.end(),
                       [](const LindbladTerm& t) { return hermiticity_defect(t.op) <= tolerance::kHermitian; });
  }

 private:
  Matrix h_;
  std::vector<LindbladTerm> terms_;
  std::vector<Matrix> ldag_l_;
};

/// -i[H, rho] - 1/2 sum kappa (L^dag L rho + rho L^dag L - 2 L rho L^dag).
inline Matrix lindblad_rhs(const LindbladSpec& spec, const Matrix& rho) {
  Matrix out = -kI * commutator(spec.hamiltonian(), rho);
  for (std::size_t m = 0; m < spec.terms().size(); ++m) {
    const auto& term = spec.terms()[m];
    if (term.rate == 0.0) continue;
    const Matrix& ll = spec.ldag_l()[m];
    out -= (0.5 * term.rate) * (ll * rho + rho * ll - 2.0 * term.op * rho * term.op.adjoint());
  }
  return out;
}

inline Matrix lindblad_rhs(const LindbladSpec& spec, const DensityMatrix& rho) {
  if (rho.dim() != spec.dim()) throw std::invalid_argument("lindblad_rhs: dimension mismatch");
  return lindblad_rhs(spec, rho.matrix());
}

struct EvolveOptions {
  std::size_t store_every = 1;
  /// Positivity is checked every this many steps and always at stored snapshots.
  std::size_t positivity_every = 1;
  double positivity_abort = 1e-6;
  double trace_drift_abort = 1e-8;
};

struct TimeSeries {
  std::vector<double> times;
  std::vector<Matrix> states;
  std::vector<std::string> warnings;

  DensityMatrix state_at(std::size_t i, const Dims& dims) const { return DensityMatrix(states.at(i), dims); }
};

/// Largest singular value.
inline double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return std::sqrt(std::max(hermitian_eigenvalues(m.adjoint() * m).maxCoeff(), 0.0));
}

namespace detail {

inline void check_snapshot(const Matrix& rho, std::size_t step, double t, const EvolveOptions& opt, bool eig) {
  const double drift = std::abs(rho.trace() - 1.0);
  if (drift > opt.trace_drift_abort) {
    throw numerical_error("evolve: trace drift " + std::to_string(drift) + " at t=" + std::to_string(t));
  }
  if (eig) {
    const double min_eig = hermitian_eigenvalues(rho).minCoeff();
    if (min_eig < -opt.positivity_abort) {
      throw numerical_error("evolve: positivity violated at step " + std::to_string(step) +
                            " (min eigenvalue " + std::to_string(min_eig) + ")");
    }
  }
}

}  // namespace detail

/// Integrates any density-matrix generator with RK4 plus per-step Hermitian
/// symmetrization and the snapshot contract of `evolve`.
template <class Generator>
TimeSeries evolve_generator(Generator&& rhs, const Matrix& rho0, double t_final, double dt,
                            const EvolveOptions& opt = {}) {
  if (opt.store_every == 0 || opt.positivity_every == 0) throw std::invalid_argument("evolve: zero stride");
  TimeSeries out;
  const StepPlan plan = plan_steps(t_final, dt);
  integrate_rk4(
      rhs, rho0, t_final, dt, [](Matrix& y) { y = symmetrize(y); },
      [&](std::size_t n, double t, const Matrix& y) {
        const bool store = n % opt.store_every == 0 || n == plan.steps;
        detail::check_snapshot(y, n, t, opt, store || n % opt.positivity_every == 0);
        if (store) {
          out.times.push_back(t);
          out.states.push_back(y);
        }
      });
  return out;
}

/// Fixed-step RK4 Lindblad evolution. Warns when dt * max(kappa ||L||^2, ||H||) > 0.1.
inline TimeSeries evolve(const LindbladSpec& spec, const DensityMatrix& rho0, double t_final, double dt,
                         const EvolveOptions& opt = {}) {
  if (rho0.dim() != spec.dim()) throw std::invalid_argument("evolve: dimension mismatch");
  if (t_final > 0.0 && dt > t_final) throw std::invalid_argument("evolve: dt exceeds t_final");
  double stiffness = spectral_norm(spec.hamiltonian());
  for (const auto& term : spec.terms()) stiffness = std::max(stiffness, term.rate * std::pow(spectral_norm(term.op), 2));
  auto out = evolve_generator([&spec](const Matrix& rho) { return lindblad_rhs(spec, rho); }, rho0.matrix(),
                              t_final, dt, opt);
  if (dt * stiffness > 0.1) {
    out.warnings.push_back("dt * max(kappa ||L||^2, ||H||) = " + std::to_string(dt * stiffness) + " exceeds 0.1");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Diffusive unraveling

struct TrajectoryConfig {
  double dt = 1e-3;
  double t_final = 1.0;
  std::size_t n_trajectories = 1;
  std::uint64_t master_seed = 0;
  std::size_t store_every = 1;
  /// 0 picks DECOHERENCE_THREADS or the hardware concurrency.
  std::size_t workers = 0;
  bool keep_states = false;
};

struct TrajectoryRecord {
  Vector final_state;
  double final_norm;
  /// Largest |norm - 1| seen before renormalization.
  double max_step_norm_defect;
  /// Snapshots aligned with UnravelResult::times when keep_states is set.
  std::vector<Vector> states;
};

struct UnravelResult {
  std::vector<double> times;
  std::vector<Matrix> mean_states;
  std::vector<TrajectoryRecord> trajectories;
};

inline std::size_t default_worker_count() {
  if (const char* env = std::getenv("DECOHERENCE_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<std::size_t>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs `task(i)` for i in [0, n) on `workers` threads. Tasks must write only
/// to slots owned by their index.
template <class Task>
void parallel_for(std::size_t n, std::size_t workers, Task&& task) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

namespace detail {

/// Euler-Maruyama integration of the diffusive stochastic Schroedinger
/// equation for Hermitian L:
///   dpsi = [-iH - 1/2 sum kappa (L - <L>)^2] psi dt + sum sqrt(kappa) (L - <L>) psi dW,
/// followed by renormalization.
class DiffusiveStepper {
 public:
  explicit DiffusiveStepper(const LindbladSpec& spec) : spec_(spec) {
    for (const auto& term : spec.terms()) {
      if (term.rate > 0.0) {
        ops_.push_back(term.op);
        sqrt_rates_.push_back(std::sqrt(term.rate));
      }
    }
  }

  template <class Rng>
  double step(Vector& psi, double dt, Rng& rng) {
    std::normal_distribution<double> normal(0.0, std::sqrt(dt));
    Vector drift = -kI * (spec_.hamiltonian() * psi);
    Vector noise = Vector::Zero(psi.size());
    for (std::size_t m = 0; m < ops_.size(); ++m) {
      const Vector lpsi = ops_[m] * psi;
      const double mean = psi.dot(lpsi).real();
      const Vector shifted = lpsi - mean * psi;
      const Vector shifted2 = ops_[m] * shifted - mean * shifted;
      const double k = sqrt_rates_[m] * sqrt_rates_[m];
      drift -= (0.5 * k) * shifted2;
      noise += (sqrt_rates_[m] * normal(rng)) * shifted;
    }
    psi += dt * drift + noise;
    const double norm = psi.norm();
    psi /= norm;
    return std::abs(norm - 1.0);
  }

 private:
  const LindbladSpec& spec_;
  std::vector<Matrix> ops_;
  std::vector<double> sqrt_rates_;
};

}  // namespace detail

/// Ensemble of diffusive trajectories. The ensemble depends only on
/// master_seed: trajectory i draws from SplitMix64::stream(master_seed, i) and
/// partial sums are formed over fixed blocks of 64 trajectories and reduced in
/// block order.
inline UnravelResult unravel(const LindbladSpec& spec, const StateVector& psi0, const TrajectoryConfig& cfg) {
  if (!spec.hermitian_operators()) throw std::invalid_argument("unravel: Lindblad operators must be Hermitian");
  if (psi0.dim() != spec.dim()) throw std::invalid_argument("unravel: dimension mismatch");
  if (!(cfg.dt > 0.0) || cfg.n_trajectories < 1 || cfg.store_every == 0) {
    throw std::invalid_argument("unravel: invalid TrajectoryConfig");
  }
  const StepPlan plan = plan_steps(cfg.t_final, cfg.dt);

  UnravelResult out;
  for (std::size_t n = 0; n <= plan.steps; ++n) {
    if (n % cfg.store_every == 0 || n == plan.steps) {
      out.times.push_back(n == plan.steps ? cfg.t_final : static_cast<double>(n) * plan.dt);
    }
  }
  const std::size_t n_snap = out.times.size();
  const auto d = static_cast<Eigen::Index>(spec.dim());

  constexpr std::size_t kBlock = 64;
  const std::size_t n_blocks = (cfg.n_trajectories + kBlock - 1) / kBlock;
  std::vector<std::vector<Matrix>> block_sums(n_blocks, std::vector<Matrix>(n_snap, Matrix::Zero(d, d)));
  out.trajectories.resize(cfg.n_trajectories);

  const detail::DiffusiveStepper stepper_proto(spec);
  parallel_for(n_blocks, cfg.workers == 0 ? default_worker_count() : cfg.workers, [&](std::size_t b) {
    detail::DiffusiveStepper stepper = stepper_proto;
    auto& sums = block_sums[b];
    const std::size_t end = std::min(cfg.n_trajectories, (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) {
      SplitMix64 rng = SplitMix64::stream(cfg.master_seed, i);
      Vector psi = psi0.amplitudes();
      TrajectoryRecord rec{Vector(), 1.0, 0.0, {}};
      std::size_t snap = 0;
      for (std::size_t n = 0; n <= plan.steps; ++n) {
        if (n > 0) rec.max_step_norm_defect = std::max(rec.max_step_norm_defect, stepper.step(psi, plan.dt, rng));
        if (n % cfg.store_every == 0 || n == plan.steps) {
          sums[snap].noalias() += psi * psi.adjoint();
          if (cfg.keep_states) rec.states.push_back(psi);
          ++snap;
        }
      }
      rec.final_state = psi;
      rec.final_norm = psi.norm();
      out.trajectories[i] = std::move(rec);
    }
  });

  out.mean_states.assign(n_snap, Matrix::Zero(d, d));
  for (const auto& sums : block_sums) {
    for (std::size_t s = 0; s < n_snap; ++s) out.mean_states[s] += sums[s];
  }
  for (auto& m : out.mean_states) m /= static_cast<double>(cfg.n_trajectories);
  return out;
}

}  // namespace decoherence
