#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lingrad/core.hpp"
#include "lingrad/discrete_gradient.hpp"
#include "lingrad/errors.hpp"
#include "lingrad/expr.hpp"
#include "lingrad/sampling.hpp"
#include "lingrad/solver.hpp"
#include "lingrad/stepper.hpp"

namespace lingrad {

/// Dense order-p tensor over R^n, row-major flat storage (last index
/// fastest). Kept small by the n <= 8, p <= 4 budget enforced at the
/// TensorField boundary.
class Tensor {
 public:
  Tensor(int n, int p)
      : n_(n), p_(p), data_(static_cast<std::size_t>(std::pow(n, p)), 0.0) {
    if (n < 1 || p < 1) {
      throw InvalidArgumentError("Tensor: dimension and order must be >= 1");
    }
  }

  int dimension() const noexcept { return n_; }
  int order() const noexcept { return p_; }
  std::size_t size() const noexcept { return data_.size(); }
  const std::vector<double>& data() const noexcept { return data_; }
  std::vector<double>& data() noexcept { return data_; }

  std::size_t flat(const std::vector<int>& idx) const {
    if (static_cast<int>(idx.size()) != p_) {
      throw InvalidArgumentError("Tensor: index arity mismatch");
    }
    std::size_t f = 0;
    for (int k = 0; k < p_; ++k) {
      if (idx[static_cast<std::size_t>(k)] < 0 ||
          idx[static_cast<std::size_t>(k)] >= n_) {
        throw InvalidArgumentError("Tensor: index out of range");
      }
      f = f * static_cast<std::size_t>(n_) +
          static_cast<std::size_t>(idx[static_cast<std::size_t>(k)]);
    }
    return f;
  }

  double operator()(const std::vector<int>& idx) const {
    return data_[flat(idx)];
  }
  double& operator()(const std::vector<int>& idx) { return data_[flat(idx)]; }

  template <typename... Ix>
  double at(Ix... ix) const {
    return data_[flat(std::vector<int>{static_cast<int>(ix)...})];
  }
  template <typename... Ix>
  double& at(Ix... ix) {
    return data_[flat(std::vector<int>{static_cast<int>(ix)...})];
  }

  /// Decodes a flat offset into the index tuple (inverse of flat()).
  std::vector<int> unflat(std::size_t f) const {
    std::vector<int> idx(static_cast<std::size_t>(p_));
    for (int k = p_ - 1; k >= 0; --k) {
      idx[static_cast<std::size_t>(k)] = static_cast<int>(f % n_);
      f /= static_cast<std::size_t>(n_);
    }
    return idx;
  }

  /// New tensor with slots a and b exchanged.
  Tensor transposed(int a, int b) const {
    if (a < 0 || b < 0 || a >= p_ || b >= p_) {
      throw InvalidArgumentError("Tensor::transposed: slot out of range");
    }
    Tensor out(n_, p_);
    for (std::size_t f = 0; f < data_.size(); ++f) {
      std::vector<int> idx = unflat(f);
      std::swap(idx[static_cast<std::size_t>(a)],
                idx[static_cast<std::size_t>(b)]);
      out.data_[out.flat(idx)] = data_[f];
    }
    return out;
  }

  /// True when every adjacent transposition flips the sign, which by
  /// generation of the symmetric group means full antisymmetry.
  bool fully_antisymmetric(double tol = 1e-12) const {
    for (int a = 0; a + 1 < p_; ++a) {
      const Tensor t = transposed(a, a + 1);
      for (std::size_t f = 0; f < data_.size(); ++f) {
        if (std::abs(t.data_[f] + data_[f]) > tol) return false;
      }
    }
    return true;
  }

  /// Order-n alternating tensor with epsilon_{1..n} = +1.
  static Tensor levi_civita(int n) {
    Tensor out(n, n);
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (std::size_t f = 0; f < out.size(); ++f) {
      idx = out.unflat(f);
      // parity of the permutation; zero on repeated indices
      std::vector<int> perm = idx;
      int sign = 1;
      bool repeated = false;
      for (std::size_t i = 0; i < perm.size() && !repeated; ++i) {
        for (std::size_t j = i + 1; j < perm.size(); ++j) {
          if (perm[i] == perm[j]) {
            repeated = true;
            break;
          }
          if (perm[i] > perm[j]) sign = -sign;
        }
      }
      out.data()[f] = repeated ? 0.0 : static_cast<double>(sign);
    }
    return out;
  }

 private:
  int n_;
  int p_;
  std::vector<double> data_;
};

/// State-dependent tensor with the desk-scale budget n <= 8, 2 <= p <= 4.
struct TensorField {
  int dimension = 0;
  int order = 0;
  std::function<Tensor(const StateVector&)> value;

  Tensor operator()(const StateVector& x) const {
    detail::require_dimension(x, dimension, "TensorField");
    if (dimension > 8 || order < 2 || order > 4) {
      throw InvalidArgumentError(
          "TensorField: budget is dimension <= 8 and order in [2,4]");
    }
    Tensor t = value(x);
    if (t.dimension() != dimension || t.order() != order) {
      throw InvalidArgumentError("TensorField: value shape mismatch");
    }
    for (double v : t.data()) {
      if (!std::isfinite(v)) {
        throw EvaluationDomainError("TensorField: non-finite entry");
      }
    }
    return t;
  }
};

/// Multilinear-gradient system xdot = L(x) gradV_1 ... gradV_m with an
/// order-(m+1) tensor field L, fully antisymmetric in the conservative
/// case handled here.
struct MultiLinearGradientSystem {
  int dimension = 0;
  int m = 0;
  TensorField L;
  std::vector<ScalarField> V_list;
  std::optional<VectorField> raw_f;
  Params parameters;
  std::string name;
};

namespace detail {

/// out_{i0} = sum over i1..i_{p-1} of T_{i0,..} prod_k vecs[k][i_k].
inline StateVector contract_all_but_first(
    const Tensor& T, const std::vector<StateVector>& vecs) {
  const int n = T.dimension();
  const int p = T.order();
  if (static_cast<int>(vecs.size()) != p - 1) {
    throw InvalidArgumentError("contract: need order-1 vectors");
  }
  StateVector out = StateVector::Zero(n);
  const auto& data = T.data();
  for (std::size_t f = 0; f < data.size(); ++f) {
    const double c = data[f];
    if (c == 0.0) continue;
    std::size_t rest = f;
    double prod = 1.0;
    for (int k = p - 1; k >= 1; --k) {
      const int ik = static_cast<int>(rest % static_cast<std::size_t>(n));
      rest /= static_cast<std::size_t>(n);
      prod *= vecs[static_cast<std::size_t>(k - 1)][ik];
    }
    out[static_cast<int>(rest)] += c * prod;
  }
  return out;
}

}  // namespace detail

/// Validating constructor: shapes must agree and L must be fully
/// antisymmetric at every sampled point (25 Halton points in [-2,2]^n when
/// no cloud is given).
inline MultiLinearGradientSystem make_multilinear_system(
    TensorField L, std::vector<ScalarField> V_list,
    std::vector<StateVector> cloud = {}, double antisym_tol = 1e-10) {
  const int n = L.dimension;
  if (V_list.empty()) {
    throw InvalidArgumentError("make_multilinear_system: need at least one V");
  }
  if (L.order != static_cast<int>(V_list.size()) + 1) {
    throw InvalidArgumentError(
        "make_multilinear_system: L order must be m + 1");
  }
  for (const auto& V : V_list) {
    if (V.dimension != n) {
      throw InvalidArgumentError(
          "make_multilinear_system: V dimension mismatch");
    }
  }
  if (cloud.empty()) cloud = halton_box(n, 25, -2.0, 2.0);
  for (const auto& x : cloud) {
    if (!L(x).fully_antisymmetric(antisym_tol)) {
      throw InvalidArgumentError(
          "make_multilinear_system: L is not fully antisymmetric");
    }
  }
  MultiLinearGradientSystem sys;
  sys.dimension = n;
  sys.m = static_cast<int>(V_list.size());
  sys.L = std::move(L);
  sys.V_list = std::move(V_list);
  return sys;
}

/// Right-hand side of the multilinear-gradient form: L(x) contracted with
/// every grad V_j(x).
inline StateVector multilinear_rhs(const MultiLinearGradientSystem& sys,
                                   const StateVector& x) {
  detail::require_dimension(x, sys.dimension, "multilinear_rhs");
  std::vector<StateVector> grads;
  grads.reserve(sys.V_list.size());
  for (const auto& V : sys.V_list) grads.push_back(V.grad(x));
  return detail::contract_all_but_first(sys.L(x), grads);
}

/// p-linear bracket {f_1,...,f_p}_L: full contraction of L with the p
/// gradients.
inline double bracket(const TensorField& L,
                      const std::vector<ScalarField>& f_list,
                      const StateVector& x) {
  if (static_cast<int>(f_list.size()) != L.order) {
    throw InvalidArgumentError("bracket: need exactly L.order fields");
  }
  std::vector<StateVector> grads;
  grads.reserve(f_list.size());
  for (const auto& f : f_list) {
    if (f.dimension != L.dimension) {
      throw InvalidArgumentError("bracket: field dimension mismatch");
    }
    grads.push_back(f.grad(x));
  }
  const Tensor T = L(x);
  const int n = T.dimension();
  const int p = T.order();
  double acc = 0.0;
  const auto& data = T.data();
  for (std::size_t f = 0; f < data.size(); ++f) {
    const double c = data[f];
    if (c == 0.0) continue;
    std::size_t rest = f;
    double prod = 1.0;
    for (int k = p - 1; k >= 0; --k) {
      const int ik = static_cast<int>(rest % static_cast<std::size_t>(n));
      rest /= static_cast<std::size_t>(n);
      prod *= grads[static_cast<std::size_t>(k)][ik];
    }
    acc += c * prod;
  }
  return acc;
}

/// W = {V, V_1, ..., V_m}_L, the growth rate of V along the flow.
inline double lyapunov_bracket_W(const MultiLinearGradientSystem& sys,
                                 const ScalarField& V, const StateVector& x) {
  std::vector<ScalarField> fields;
  fields.reserve(sys.V_list.size() + 1);
  fields.push_back(V);
  for (const auto& Vj : sys.V_list) fields.push_back(Vj);
  return bracket(sys.L, fields, x);
}

/// Tensor with slot 0 and slot j exchanged, exchanging the roles of V and
/// V_j in the bracket; for fully antisymmetric L this is -L.
inline TensorField slot_swap(const TensorField& L, int j) {
  if (j < 1 || j > L.order - 1) {
    throw InvalidArgumentError("slot_swap: slot must be in [1, m]");
  }
  TensorField out;
  out.dimension = L.dimension;
  out.order = L.order;
  auto inner = L;
  out.value = [inner, j](const StateVector& x) {
    return inner(x).transposed(0, j);
  };
  return out;
}

/// Leibniz-rule residual in slot j. The composite slot receives
/// phi(g_1(x),...,g_k(x)) whose gradient is taken by central finite
/// differences of the composed value, while the right-hand side uses the
/// symbolic partials of phi with the analytic gradients of the g's; the
/// two routes agree to finite-difference error when the bracket obeys the
/// Leibniz rule.
///   residual = |{..., phi(g),...}_L - sum_i dphi/dg_i {..., g_i, ...}_L|.
/// `others` supplies the p-1 fields occupying the remaining slots in order.
inline double leibniz_check(const TensorField& L,
                            const std::vector<ScalarField>& others,
                            const std::vector<ScalarField>& g_list,
                            const expr::Expression& phi, int slot_j,
                            const StateVector& x,
                            const Params& params = {}) {
  const int p = L.order;
  if (slot_j < 1 || slot_j > p) {
    throw InvalidArgumentError("leibniz_check: slot out of range");
  }
  if (static_cast<int>(others.size()) != p - 1) {
    throw InvalidArgumentError("leibniz_check: need p-1 other fields");
  }
  const int k = static_cast<int>(g_list.size());
  if (phi.dimension != k) {
    throw InvalidArgumentError(
        "leibniz_check: phi arity must match g_list size");
  }
  const int n = L.dimension;

  auto composite_value = [&](const StateVector& y) {
    StateVector g(k);
    for (int i = 0; i < k; ++i) g[i] = g_list[static_cast<std::size_t>(i)](y);
    return expr::evaluate(phi, g, params);
  };
  // Step near cbrt(eps) balances the O(h^2) truncation of the central
  // difference against the eps*|phi|/h roundoff; the default 1e-6 sits
  // below the optimum and lets roundoff dominate the residual.
  constexpr double fd_step = 6e-6;
  ScalarField composite{
      n, composite_value,
      [composite_value, n](const StateVector& y) {
        return central_difference_gradient(composite_value, y, fd_step);
      }};

  auto slotted = [&](const ScalarField& inserted) {
    std::vector<ScalarField> fields;
    fields.reserve(static_cast<std::size_t>(p));
    int oi = 0;
    for (int s = 1; s <= p; ++s) {
      if (s == slot_j) {
        fields.push_back(inserted);
      } else {
        fields.push_back(others[static_cast<std::size_t>(oi++)]);
      }
    }
    return fields;
  };

  const double lhs = bracket(L, slotted(composite), x);

  StateVector g(k);
  for (int i = 0; i < k; ++i) g[i] = g_list[static_cast<std::size_t>(i)](x);
  double rhs = 0.0;
  for (int i = 1; i <= k; ++i) {
    const double dphi = expr::evaluate(expr::differentiate(phi, i), g, params);
    rhs += dphi * bracket(L, slotted(g_list[static_cast<std::size_t>(i - 1)]),
                          x);
  }
  return std::abs(lhs - rhs);
}

/// One step of the structure-preserving map for Eq. 25's flow:
///   (x' - x)/tau = Ltilde contracted with dgV_1(x,x'), ..., dgV_m(x,x'),
/// Ltilde = L((x+x')/2). Full antisymmetry makes the full contraction with
/// a repeated dgV_j slot vanish, so every V_j is conserved to solver
/// tolerance.
inline std::pair<StateVector, StepDiagnostics> multi_step(
    const MultiLinearGradientSystem& sys, const StateVector& x, double tau,
    const DiscreteGradientScheme& scheme = DiscreteGradientScheme::midpoint(),
    const SolverConfig& solver = SolverConfig{}) {
  detail::require_dimension(x, sys.dimension, "multi_step");
  if (!(tau > 0.0)) {
    throw InvalidArgumentError("multi_step: tau must be positive");
  }
  auto residual = [&](const StateVector& y) -> StateVector {
    std::vector<StateVector> gbars;
    gbars.reserve(sys.V_list.size());
    for (const auto& V : sys.V_list) {
      gbars.push_back(discrete_gradient(scheme, V, x, y));
    }
    const Tensor Lt = sys.L(0.5 * (x + y));
    return y - x - tau * detail::contract_all_but_first(Lt, gbars);
  };

  StateVector guess = x;
  try {
    const StateVector rate = multilinear_rhs(sys, x);
    if (rate.allFinite()) guess = x + tau * rate;
  } catch (const EvaluationDomainError&) {
  }

  SolverConfig effective = solver;
  effective.tol =
      std::max(solver.tol * tau,
               4.0 * std::numeric_limits<double>::epsilon() * (1.0 + x.norm()));
  const SolveResult result = solve_implicit_full(residual, guess, effective);
  return {result.y,
          StepDiagnostics{result.iterations, result.residual / tau}};
}

/// Iterates multi_step; v_values carries one row per V_j.
inline Trajectory multi_integrate(
    const MultiLinearGradientSystem& sys, const StateVector& x0, double tau,
    int n_steps,
    const DiscreteGradientScheme& scheme = DiscreteGradientScheme::midpoint(),
    const SolverConfig& solver = SolverConfig{}) {
  detail::require_dimension(x0, sys.dimension, "multi_integrate");
  if (n_steps < 1) {
    throw InvalidArgumentError("multi_integrate: n_steps must be >= 1");
  }
  Trajectory traj;
  traj.v_values.resize(sys.V_list.size());
  auto push = [&](double t, const StateVector& x, const StepDiagnostics& d) {
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.diagnostics.push_back(d);
    for (std::size_t j = 0; j < sys.V_list.size(); ++j) {
      traj.v_values[j].push_back(sys.V_list[j](x));
    }
  };
  push(0.0, x0, StepDiagnostics{0, 0.0});
  StateVector x = x0;
  for (int k = 1; k <= n_steps; ++k) {
    StateVector x_next;
    StepDiagnostics diag;
    try {
      std::tie(x_next, diag) = multi_step(sys, x, tau, scheme, solver);
    } catch (const SolverDivergenceError& e) {
      throw IntegrateDivergenceError(
          "multi_integrate: step " + std::to_string(k) + " failed: " +
              e.what(),
          std::move(traj), static_cast<std::size_t>(k), e.iterations(),
          e.residual());
    } catch (const Error& e) {
      throw IntegrateDivergenceError(
          "multi_integrate: step " + std::to_string(k) + " failed: " +
              e.what(),
          std::move(traj), static_cast<std::size_t>(k), 0, 0.0);
    }
    x = x_next;
    push(k * tau, x, diag);
  }
  traj.validate();
  return traj;
}

}  // namespace lingrad
