#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "lingrad/core.hpp"
#include "lingrad/errors.hpp"

namespace lingrad {

enum class SolverMethod { FixedPoint, NewtonFD };

/// Configuration for the implicit-relation solver. `tol` is the residual
/// norm threshold in the units of the residual handed to solve_implicit.
struct SolverConfig {
  SolverMethod method = SolverMethod::FixedPoint;
  double tol = 1e-12;
  int max_iter = 100;
  double fd_step = 1e-7;
};

struct SolveResult {
  StateVector y;
  int iterations = 0;
  double residual = 0.0;
};

namespace detail {

inline void validate(const SolverConfig& cfg) {
  if (!(cfg.tol > 0.0)) {
    throw InvalidArgumentError("SolverConfig: tol must be positive");
  }
  if (cfg.max_iter < 1) {
    throw InvalidArgumentError("SolverConfig: max_iter must be >= 1");
  }
  if (!(cfg.fd_step > 0.0)) {
    throw InvalidArgumentError("SolverConfig: fd_step must be positive");
  }
}

}  // namespace detail

/// Finds y with ||residual(y)|| <= cfg.tol. FixedPoint iterates
/// y <- y - residual(y) and hands over to NewtonFD (forward-difference
/// Jacobian, QR solve) after max_iter/2 non-contracting iterations or a
/// residual that leaves the domain; NewtonFD may also be selected directly.
/// Reports the iterate, the iteration count, and the final residual norm.
inline SolveResult solve_implicit_full(
    const std::function<StateVector(const StateVector&)>& residual,
    const StateVector& guess, const SolverConfig& cfg) {
  detail::validate(cfg);
  StateVector y = guess;
  StateVector r = residual(y);
  detail::require_dimension(r, static_cast<int>(y.size()), "solve_implicit");
  double rn = r.norm();
  if (!std::isfinite(rn)) {
    throw SolverDivergenceError("solve_implicit: residual not finite at guess",
                                0, rn);
  }
  if (rn <= cfg.tol) return {y, 0, rn};

  bool newton = cfg.method == SolverMethod::NewtonFD;
  int stalled = 0;
  const int stall_budget = std::max(1, cfg.max_iter / 2);
  int used = 0;

  while (used < cfg.max_iter) {
    if (!newton) {
      const StateVector y_next = y - r;
      ++used;
      bool left_domain = false;
      StateVector r_next;
      double rn_next = std::numeric_limits<double>::infinity();
      try {
        r_next = residual(y_next);
        rn_next = r_next.norm();
        if (!std::isfinite(rn_next)) left_domain = true;
      } catch (const EvaluationDomainError&) {
        left_domain = true;
      } catch (const GradientTooSmallError&) {
        left_domain = true;
      }
      if (left_domain) {
        // Keep the last in-domain iterate and let Newton take over.
        newton = true;
        continue;
      }
      y = y_next;
      r = r_next;
      if (rn_next <= cfg.tol) return {y, used, rn_next};
      if (rn_next >= rn && ++stalled >= stall_budget) newton = true;
      rn = rn_next;
    } else {
      const int n = static_cast<int>(y.size());
      Matrix J(n, n);
      for (int j = 0; j < n; ++j) {
        // Power-of-two step keeps (y_j + h) - y_j exact, so the Jacobian
        // of affine residuals is reproduced without differencing noise.
        const double h =
            std::exp2(std::round(std::log2(cfg.fd_step * (1.0 + std::abs(y[j])))));
        StateVector yp = y;
        yp[j] += h;
        J.col(j) = (residual(yp) - r) / h;
      }
      if (!J.allFinite()) {
        throw SolverDivergenceError(
            "solve_implicit: Jacobian not finite", used, rn);
      }
      const StateVector d = J.colPivHouseholderQr().solve(r);
      if (!d.allFinite()) {
        throw SolverDivergenceError(
            "solve_implicit: Newton direction not finite", used, rn);
      }
      y -= d;
      ++used;
      r = residual(y);
      rn = r.norm();
      if (!std::isfinite(rn)) {
        throw SolverDivergenceError(
            "solve_implicit: residual not finite after Newton step", used, rn);
      }
      if (rn <= cfg.tol) return {y, used, rn};
    }
  }
  throw SolverDivergenceError(
      "solve_implicit: no convergence within " + std::to_string(cfg.max_iter) +
          " iterations",
      used, rn);
}

/// Spec-facing wrapper returning only the iterate.
inline StateVector solve_implicit(
    const std::function<StateVector(const StateVector&)>& residual,
    const StateVector& guess, const SolverConfig& cfg) {
  return solve_implicit_full(residual, guess, cfg).y;
}

}  // namespace lingrad
