#pragma once

// Predictability sieve and fragment mutual information.

#include "decoherence/lindblad.hpp"
#include "decoherence/pointer.hpp"
#include "decoherence/spin_spin.hpp"

#include <functional>

namespace decoherence {

/// Maps a pure initial system state to reduced system states at the given times.
using ReducedDynamics = std::function<std::vector<Matrix>(const StateVector&, const std::vector<double>&)>;

/// Reduced dynamics of any density-matrix generator, integrated with RK4
/// between consecutive sample times.
template <class Generator>
ReducedDynamics generator_dynamics(Generator rhs, double dt, EvolveOptions opt = {}) {
  return [rhs = std::move(rhs), dt, opt](const StateVector& psi, const std::vector<double>& times) {
    std::vector<Matrix> out;
    Matrix rho = psi.amplitudes() * psi.amplitudes().adjoint();
    double t = 0.0;
    for (double tk : times) {
      if (tk < t) throw std::invalid_argument("sieve: time grid must be nondecreasing and nonnegative");
      if (tk > t) {
        const auto series = evolve_generator(rhs, rho, tk - t, std::min(dt, tk - t), opt);
        rho = series.states.back();
        t = tk;
      }
      out.push_back(rho);
    }
    return out;
  };
}

inline ReducedDynamics lindblad_dynamics(const LindbladSpec& spec, double dt, EvolveOptions opt = {}) {
  return generator_dynamics([spec](const Matrix& rho) { return lindblad_rhs(spec, rho); }, dt, opt);
}

/// System (factor 0 of `dims`) coupled to an environment in pure state e0
/// under the full Hamiltonian h_total, by exact diagonalization.
inline ReducedDynamics unitary_dynamics(const Matrix& h_total, std::size_t dim_s, const StateVector& e0) {
  if (static_cast<std::size_t>(h_total.rows()) != dim_s * e0.dim()) {
    throw std::invalid_argument("unitary_dynamics: dimension mismatch");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(h_total));
  const Dims dims{dim_s, e0.dim()};
  return [eig, dims, env = e0.amplitudes()](const StateVector& psi, const std::vector<double>& times) {
    const Vector in_eig = eig.eigenvectors().adjoint() * kron(psi.amplitudes(), env);
    std::vector<Matrix> out;
    for (double t : times) {
      Vector v = in_eig;
      for (Eigen::Index i = 0; i < v.size(); ++i) v(i) *= std::polar(1.0, -eig.eigenvalues()(i) * t);
      out.push_back(reduce_pure(Vector(eig.eigenvectors() * v), dims, {0}));
    }
    return out;
  };
}

inline ReducedDynamics spin_spin_dynamics(const SpinEnvironment& env) {
  env.validate();
  return [env](const StateVector& psi, const std::vector<double>& times) {
    const RealVector t = Eigen::Map<const RealVector>(times.data(), static_cast<Eigen::Index>(times.size()));
    return spin_spin_exact(env, psi, t).reduced;
  };
}

enum class SieveMeasure { purity, entropy };

struct SieveCandidate {
  std::string label;
  StateVector initial;
  std::vector<double> purity;
  std::vector<double> entropy;  // bits
};

struct SieveReport {
  std::vector<double> times;
  std::vector<SieveCandidate> candidates;
  SieveMeasure measure = SieveMeasure::purity;
  /// Candidate indices, most predictable first, by the chosen measure at the horizon.
  std::vector<std::size_t> ranking;
  std::vector<std::size_t> purity_ranking;   // descending purity
  std::vector<std::size_t> entropy_ranking;  // ascending entropy

  const SieveCandidate& best() const { return candidates.at(ranking.front()); }
};

/// Evolves every candidate, records purity and entropy, and ranks at the last
/// time. Equal scores keep the input order.
inline SieveReport predictability_sieve(const ReducedDynamics& dynamics,
                                        const std::vector<std::pair<std::string, StateVector>>& candidates,
                                        const std::vector<double>& times, SieveMeasure measure = SieveMeasure::purity,
                                        std::size_t workers = 1) {
  if (candidates.empty()) throw std::invalid_argument("predictability_sieve: no candidates");
  if (times.empty()) throw std::invalid_argument("predictability_sieve: empty time grid");
  SieveReport r;
  r.times = times;
  r.measure = measure;
  for (const auto& [label, psi] : candidates) r.candidates.push_back({label, psi, {}, {}});
  parallel_for(r.candidates.size(), workers, [&](std::size_t i) {
    auto& c = r.candidates[i];
    for (const Matrix& rho : dynamics(c.initial, times)) {
      c.purity.push_back(purity(rho));
      c.entropy.push_back(entropy(symmetrize(rho)));
    }
  });
  std::vector<std::size_t> order(r.candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  r.purity_ranking = order;
  std::stable_sort(r.purity_ranking.begin(), r.purity_ranking.end(), [&](std::size_t a, std::size_t b) {
    return r.candidates[a].purity.back() > r.candidates[b].purity.back();
  });
  r.entropy_ranking = order;
  std::stable_sort(r.entropy_ranking.begin(), r.entropy_ranking.end(), [&](std::size_t a, std::size_t b) {
    return r.candidates[a].entropy.back() < r.candidates[b].entropy.back();
  });
  r.ranking = measure == SieveMeasure::purity ? r.purity_ranking : r.entropy_ranking;
  return r;
}

// ---------------------------------------------------------------------------
// Fragment information

struct FragmentCurve {
  std::vector<std::size_t> sizes;
  std::vector<double> mean;    // bits
  std::vector<double> stddev;  // over sampled fragments
  std::vector<std::size_t> samples;
  double system_entropy = 0.0;
};

namespace detail {

inline void for_each_combination(std::size_t n, std::size_t k, const std::function<void(const std::vector<std::size_t>&)>& f) {
  std::vector<std::size_t> c(k);
  std::iota(c.begin(), c.end(), std::size_t{0});
  while (true) {
    f(c);
    std::size_t i = k;
    while (i > 0 && c[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++c[i - 1];
    for (std::size_t j = i; j < k; ++j) c[j] = c[j - 1] + 1;
  }
}

}  // namespace detail

/// I(S:F) = S(S) + S(F) - S(SF) averaged over fragments F of each size. The
/// total state is pure, so S(SF) is the entropy of the remaining environment.
/// Factor 0 of the state is the system, factors 1..N the environment.
/// Every fragment is used when there are at most `samples` of them; otherwise
/// `samples` random fragments are drawn from SplitMix64::stream(seed, size).
inline FragmentCurve fragment_mutual_information(const StateVector& total, const std::vector<std::size_t>& sizes,
                                                 std::size_t samples = 30, std::uint64_t seed = 0) {
  const Dims& dims = total.dims();
  if (dims.size() < 2) throw std::invalid_argument("fragment_mutual_information: need a system and an environment");
  const std::size_t n = dims.size() - 1;
  if (n > 12) throw std::invalid_argument("fragment_mutual_information: at most 12 environment factors");
  if (samples == 0) throw std::invalid_argument("fragment_mutual_information: samples must be positive");
  FragmentCurve out;
  out.system_entropy = entropy(symmetrize(reduce_pure(total.amplitudes(), dims, {0})));
  auto info = [&](const std::vector<std::size_t>& frag) {
    if (frag.empty()) return 0.0;
    std::vector<bool> in(n + 1, false);
    std::vector<std::size_t> keep;
    for (std::size_t j : frag) {
      keep.push_back(j + 1);
      in[j + 1] = true;
    }
    std::vector<std::size_t> rest;
    for (std::size_t j = 1; j <= n; ++j) {
      if (!in[j]) rest.push_back(j);
    }
    const double s_f = entropy(symmetrize(reduce_pure(total.amplitudes(), dims, keep)));
    const double s_sf = rest.empty() ? 0.0 : entropy(symmetrize(reduce_pure(total.amplitudes(), dims, rest)));
    return out.system_entropy + s_f - s_sf;
  };
  for (std::size_t f : sizes) {
    if (f > n) throw std::invalid_argument("fragment_mutual_information: fragment size exceeds environment size");
    std::vector<double> values;
    if (binomial_exact(n, f) <= samples) {
      detail::for_each_combination(n, f, [&](const std::vector<std::size_t>& c) { values.push_back(info(c)); });
    } else {
      SplitMix64 rng = SplitMix64::stream(seed, f);
      std::vector<std::size_t> pool(n);
      for (std::size_t s = 0; s < samples; ++s) {
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        for (std::size_t i = 0; i < f; ++i) {  // partial Fisher-Yates
          const std::size_t j = i + static_cast<std::size_t>(rng.uniform() * static_cast<double>(n - i));
          std::swap(pool[i], pool[j]);
        }
        std::vector<std::size_t> frag(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(f));
        std::sort(frag.begin(), frag.end());
        values.push_back(info(frag));
      }
    }
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    out.sizes.push_back(f);
    out.mean.push_back(mean);
    out.stddev.push_back(values.size() > 1 ? std::sqrt(var / static_cast<double>(values.size() - 1)) : 0.0);
    out.samples.push_back(values.size());
  }
  return out;
}

}  // namespace decoherence
