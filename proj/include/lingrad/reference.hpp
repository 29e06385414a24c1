#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "lingrad/core.hpp"
#include "lingrad/errors.hpp"
#include "lingrad/stepper.hpp"

namespace lingrad {

/// High-accuracy baseline: adaptive Dormand-Prince 5(4) with dense output,
/// sampled exactly at `times` ({0, t_end} when omitted; the first entry must
/// be 0 and the last must equal t_end). Step-control failure raises
/// StepSizeUnderflowError; domain errors from f propagate unchanged.
inline Trajectory reference_integrate(const VectorField& f,
                                      const StateVector& x0, double t_end,
                                      double rel_tol,
                                      std::vector<double> times = {}) {
  const int n = f.dimension;
  detail::require_dimension(x0, n, "reference_integrate");
  if (!(t_end > 0.0)) {
    throw InvalidArgumentError("reference_integrate: t_end must be positive");
  }
  if (!(rel_tol >= 1e-13)) {
    throw InvalidArgumentError(
        "reference_integrate: rel_tol must be at least 1e-13");
  }
  if (times.empty()) times = {0.0, t_end};
  if (times.front() != 0.0) {
    throw InvalidArgumentError("reference_integrate: times must start at 0");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw InvalidArgumentError(
          "reference_integrate: times must be strictly increasing");
    }
  }
  if (std::abs(times.back() - t_end) > 1e-12 * std::max(1.0, t_end)) {
    throw InvalidArgumentError(
        "reference_integrate: last time must equal t_end");
  }

  f(x0);  // surface domain problems at the initial state eagerly

  auto rhs = [&f, n](const std::vector<double>& y, std::vector<double>& dydt,
                     double) {
    StateVector x(n);
    for (int i = 0; i < n; ++i) x[i] = y[i];
    const StateVector v = f(x);
    dydt.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) dydt[static_cast<std::size_t>(i)] = v[i];
  };

  Trajectory traj;
  traj.times.reserve(times.size());
  traj.states.reserve(times.size());
  traj.diagnostics.reserve(times.size());
  auto observer = [&traj, n](const std::vector<double>& y, double t) {
    StateVector x(n);
    for (int i = 0; i < n; ++i) x[i] = y[i];
    detail::require_finite(x, "reference_integrate state");
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.diagnostics.push_back(StepDiagnostics{0, 0.0});
  };

  namespace ode = boost::numeric::odeint;
  std::vector<double> y(x0.data(), x0.data() + n);
  try {
    auto stepper = ode::make_dense_output(
        rel_tol, rel_tol, ode::runge_kutta_dopri5<std::vector<double>>());
    ode::integrate_times(stepper, rhs, y, times.begin(), times.end(),
                         t_end / 1000.0, observer);
  } catch (const ode::odeint_error& e) {
    throw StepSizeUnderflowError(std::string("reference_integrate: ") +
                                 e.what());
  } catch (const std::overflow_error& e) {
    throw StepSizeUnderflowError(std::string("reference_integrate: ") +
                                 e.what());
  } catch (const EvaluationDomainError& e) {
    // The rhs was fine at x0 but left its domain mid-run (finite-time
    // blow-up); from the integrator's perspective the step has collapsed.
    throw StepSizeUnderflowError(
        std::string("reference_integrate: rhs left its domain: ") + e.what());
  }
  traj.validate();
  return traj;
}

/// Least-squares slope of log(error at t_end) against log(tau) for the
/// discrete-gradient map, with reference_integrate at rel_tol 1e-13 as the
/// exact solution. tau_list needs at least 4 strictly decreasing entries;
/// each tau is snapped to t_end/round(t_end/tau) so trajectories end at
/// exactly t_end.
inline double empirical_order(const LinearGradientSystem& sys,
                              const DiscreteGradientScheme& scheme,
                              LTildePolicy policy, const StateVector& x0,
                              double t_end,
                              const std::vector<double>& tau_list) {
  if (tau_list.size() < 4) {
    throw InvalidArgumentError(
        "empirical_order: need at least 4 tau values");
  }
  if (!(t_end > 0.0)) {
    throw InvalidArgumentError("empirical_order: t_end must be positive");
  }
  for (std::size_t i = 0; i < tau_list.size(); ++i) {
    if (!(tau_list[i] > 0.0)) {
      throw InvalidArgumentError("empirical_order: tau must be positive");
    }
    if (i > 0 && !(tau_list[i] < tau_list[i - 1])) {
      throw InvalidArgumentError(
          "empirical_order: tau_list must be strictly decreasing");
    }
  }

  const StateVector x_exact =
      reference_integrate(sys.rhs_field(), x0, t_end, 1e-13).states.back();

  SolverConfig solver;
  solver.tol = 1e-13;
  solver.max_iter = 200;

  std::vector<double> log_tau, log_err;
  for (double tau : tau_list) {
    const int n_steps = std::max<int>(1, std::lround(t_end / tau));
    const double tau_eff = t_end / n_steps;
    const Trajectory traj =
        integrate(sys, x0, tau_eff, n_steps, scheme, policy, solver);
    const double err =
        std::max((traj.states.back() - x_exact).norm(), 1e-17);
    log_tau.push_back(std::log(tau_eff));
    log_err.push_back(std::log(err));
  }

  const std::size_t m = log_tau.size();
  double st = 0.0, se = 0.0, stt = 0.0, ste = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    st += log_tau[i];
    se += log_err[i];
    stt += log_tau[i] * log_tau[i];
    ste += log_tau[i] * log_err[i];
  }
  const double denom = m * stt - st * st;
  if (std::abs(denom) < 1e-14) {
    throw InvalidArgumentError("empirical_order: degenerate tau spacing");
  }
  return (m * ste - st * se) / denom;
}

}  // namespace lingrad
