#pragma once

#include "decoherence/core.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace decoherence {

struct StepPlan {
  std::size_t steps;
  double dt;
};

/// Splits [0, t_final] into equal steps no longer than `dt`.
inline StepPlan plan_steps(double t_final, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (t_final < 0.0) throw std::invalid_argument("t_final must be nonnegative");
  if (t_final == 0.0) return {0, dt};
  const auto steps = static_cast<std::size_t>(std::ceil(t_final / dt - 1e-9));
  return {steps, t_final / static_cast<double>(steps)};
}

/// One classical Runge-Kutta step for y' = f(y).
template <class Rhs, class State>
State rk4_step(Rhs& rhs, const State& y, double h) {
  const State k1 = rhs(y);
  const State k2 = rhs(State(y + (0.5 * h) * k1));
  const State k3 = rhs(State(y + (0.5 * h) * k2));
  const State k4 = rhs(State(y + h * k3));
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Fixed-step RK4 from t = 0 to t_final. After every step `post(y)` may
/// project the state (e.g. Hermitian symmetrization) and `observe(step, t, y)`
/// is called; step 0 is the initial state.
template <class Rhs, class State, class Post, class Observe>
State integrate_rk4(Rhs&& rhs, State y, double t_final, double dt, Post&& post, Observe&& observe) {
  const StepPlan plan = plan_steps(t_final, dt);
  observe(std::size_t{0}, 0.0, static_cast<const State&>(y));
  for (std::size_t n = 1; n <= plan.steps; ++n) {
    y = rk4_step(rhs, y, plan.dt);
    post(y);
    const double t = n == plan.steps ? t_final : static_cast<double>(n) * plan.dt;
    observe(n, t, static_cast<const State&>(y));
  }
  return y;
}

}  // namespace decoherence
