#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>

#include "lingrad/core.hpp"
#include "lingrad/discrete_gradient.hpp"
#include "lingrad/errors.hpp"
#include "lingrad/solver.hpp"

namespace lingrad {

/// Where the structure matrix of the update map is evaluated. Both choices
/// satisfy the consistency condition Ltilde(x,x,0) = L(x).
enum class LTildePolicy { FrozenAtX, Midpoint };

/// Raised by integrate when a step fails; carries the trajectory up to the
/// last completed step and the 1-based index of the failing step.
class IntegrateDivergenceError : public SolverDivergenceError {
 public:
  IntegrateDivergenceError(const std::string& message, Trajectory partial,
                           std::size_t step_index, int iterations,
                           double residual)
      : SolverDivergenceError(Preformatted{}, message, iterations, residual),
        partial_(std::move(partial)),
        step_index_(step_index) {}

  const Trajectory& partial() const noexcept { return partial_; }
  std::size_t step_index() const noexcept { return step_index_; }

 private:
  Trajectory partial_;
  std::size_t step_index_;
};

/// One step of the discrete-gradient map
///   (x' - x)/tau = Ltilde(x,x') dgV(x,x').
/// The solver works on the displacement residual r(y) = y - x - tau Lt dgV,
/// so the threshold is tau*solver.tol and the reported residual ||r||/tau
/// bounds the defect of the rate-form relation above. Guarantees
/// V(x') - V(x) = tau dgV' Lt dgV up to that defect: zero for antisymmetric
/// Lt, nonpositive for negative semidefinite Lt.
inline std::pair<StateVector, StepDiagnostics> step(
    const LinearGradientSystem& sys, const StateVector& x, double tau,
    const DiscreteGradientScheme& scheme = DiscreteGradientScheme::midpoint(),
    LTildePolicy policy = LTildePolicy::Midpoint,
    const SolverConfig& solver = SolverConfig{}) {
  detail::require_dimension(x, sys.dimension, "step");
  if (!(tau > 0.0)) throw InvalidArgumentError("step: tau must be positive");

  const bool frozen = policy == LTildePolicy::FrozenAtX;
  std::optional<Matrix> L_at_x;
  auto L_tilde = [&](const StateVector& y) -> Matrix {
    if (frozen) {
      if (!L_at_x) L_at_x = sys.L(x);
      return *L_at_x;
    }
    return sys.L(0.5 * (x + y));
  };
  auto residual = [&](const StateVector& y) -> StateVector {
    const StateVector gbar = discrete_gradient(scheme, sys.V, x, y);
    return y - x - tau * (L_tilde(y) * gbar);
  };

  // Explicit Euler predictor; fall back to x itself when the rhs is not
  // available at x (the solver then starts from the previous state).
  const double eps_mach = std::numeric_limits<double>::epsilon();
  StateVector guess = x;
  double quotient_floor = 0.0;
  try {
    const Matrix Lx = sys.L(x);
    const StateVector rate = Lx * sys.V.grad(x);
    if (rate.allFinite()) {
      guess = x + tau * rate;
      if (scheme.kind != DiscreteGradientScheme::Kind::MeanValue) {
        // The secant quotients divide the rounding noise of V(x') - V(x),
        // of order eps*(1 + |V|), by the step displacement, which sits
        // near tau*||f(x)||. No iterate can push the residual below that
        // amplified noise, so it joins the convergence floor. Flooring the
        // displacement estimate by the coincidence threshold also covers
        // the branch jump there.
        const double d_est = std::max(tau * rate.norm(),
                                      detail::coincidence_threshold(x, x));
        const double l_norm = Lx.cwiseAbs().rowwise().sum().maxCoeff();
        quotient_floor = tau * l_norm * eps_mach *
                         (1.0 + 2.0 * std::abs(sys.V(x))) / d_est;
      }
    }
  } catch (const EvaluationDomainError&) {
  } catch (const GradientTooSmallError&) {
  }

  SolverConfig effective = solver;
  // The solver sees the displacement residual, so the rate-form threshold
  // scales by tau; the epsilon term is the cancellation limit of y - x,
  // below which no iterate can be certified.
  effective.tol = std::max(solver.tol * tau,
                           4.0 * eps_mach * (1.0 + x.norm()) + quotient_floor);
  const SolveResult result = solve_implicit_full(residual, guess, effective);
  return {result.y,
          StepDiagnostics{result.iterations, result.residual / tau}};
}

/// Iterates the map for n_steps from x0. The trajectory carries every
/// tracked function's values and per-step solver diagnostics (entry 0 is
/// the initial state with zero iterations). A failing step raises
/// IntegrateDivergenceError holding the completed prefix.
inline Trajectory integrate(
    const LinearGradientSystem& sys, const StateVector& x0, double tau,
    int n_steps,
    const DiscreteGradientScheme& scheme = DiscreteGradientScheme::midpoint(),
    LTildePolicy policy = LTildePolicy::Midpoint,
    const SolverConfig& solver = SolverConfig{}) {
  detail::require_dimension(x0, sys.dimension, "integrate");
  if (n_steps < 1) {
    throw InvalidArgumentError("integrate: n_steps must be >= 1");
  }
  if (!(tau > 0.0)) {
    throw InvalidArgumentError("integrate: tau must be positive");
  }
  const auto tracked = sys.tracked_functions();
  Trajectory traj;
  traj.times.reserve(static_cast<std::size_t>(n_steps) + 1);
  traj.states.reserve(static_cast<std::size_t>(n_steps) + 1);
  traj.diagnostics.reserve(static_cast<std::size_t>(n_steps) + 1);
  traj.v_values.resize(tracked.size());

  auto push = [&](double t, const StateVector& x, const StepDiagnostics& d) {
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.diagnostics.push_back(d);
    for (std::size_t j = 0; j < tracked.size(); ++j) {
      traj.v_values[j].push_back(tracked[j](x));
    }
  };

  push(0.0, x0, StepDiagnostics{0, 0.0});
  StateVector x = x0;
  for (int k = 1; k <= n_steps; ++k) {
    StateVector x_next;
    StepDiagnostics diag;
    try {
      std::tie(x_next, diag) = step(sys, x, tau, scheme, policy, solver);
    } catch (const SolverDivergenceError& e) {
      throw IntegrateDivergenceError(
          "integrate: step " + std::to_string(k) + " failed: " + e.what(),
          std::move(traj), static_cast<std::size_t>(k), e.iterations(),
          e.residual());
    } catch (const Error& e) {
      throw IntegrateDivergenceError(
          "integrate: step " + std::to_string(k) + " failed: " + e.what(),
          std::move(traj), static_cast<std::size_t>(k), 0, 0.0);
    }
    x = x_next;
    push(k * tau, x, diag);
  }
  traj.validate();
  return traj;
}

}  // namespace lingrad
