#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "lingrad/core.hpp"
#include "lingrad/errors.hpp"

namespace lingrad {

/// Family selector for the discrete gradients of Definition 1. MeanValue
/// carries its quadrature resolution; the other two ignore it.
struct DiscreteGradientScheme {
  enum class Kind { Midpoint, CoordinateIncrement, MeanValue };
  Kind kind = Kind::Midpoint;
  int quadrature_points = 2;

  static DiscreteGradientScheme midpoint() { return {Kind::Midpoint, 0}; }
  static DiscreteGradientScheme coordinate_increment() {
    return {Kind::CoordinateIncrement, 0};
  }
  static DiscreteGradientScheme mean_value(int q) {
    if (q < 1 || q > 16) {
      throw InvalidArgumentError(
          "mean_value: quadrature_points must be in [1,16]");
    }
    return {Kind::MeanValue, q};
  }
};

namespace detail {

/// Below this separation the points are numerically indistinguishable and
/// the schemes switch to their exact coincidence limits. The threshold sits
/// at machine scale on purpose: the difference-quotient branch, whose
/// secant exactness is what conserves V, stays active as long as possible,
/// and any hard switch placed higher up (say at sqrt(eps)) leaves a
/// discontinuity in the update map large enough to strand the implicit
/// solver when a fixed point lands on it. The price is rounding noise of
/// order eps*scale(V)/||x'-x|| in the quotients near the threshold; step()
/// folds exactly that bound into its convergence floor.
inline double coincidence_threshold(const StateVector& x,
                                    const StateVector& xp) {
  return 64.0 * std::numeric_limits<double>::epsilon() *
         (1.0 + x.norm() + xp.norm());
}

struct Quadrature {
  std::vector<double> nodes;    // on [0,1]
  std::vector<double> weights;  // sum to 1
};

/// Gauss-Legendre rule with q points, mapped to [0,1]; exact for
/// polynomials of degree <= 2q-1.
inline const Quadrature& gauss_legendre_01(int q) {
  if (q < 1 || q > 16) {
    throw InvalidArgumentError("gauss_legendre_01: q must be in [1,16]");
  }
  static const std::array<Quadrature, 17> table = [] {
    std::array<Quadrature, 17> t;
    for (int n = 1; n <= 16; ++n) {
      Quadrature rule;
      rule.nodes.resize(n);
      rule.weights.resize(n);
      for (int k = 0; k < n; ++k) {
        // Newton iteration on P_n from the Chebyshev-based initial guess.
        double z = std::cos(M_PI * (k + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
          double p0 = 1.0, p1 = z;
          for (int j = 2; j <= n; ++j) {
            const double p2 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p0) / j;
            p0 = p1;
            p1 = p2;
          }
          const double pn = p1;
          const double pm = p0;
          dp = n * (z * pn - pm) / (z * z - 1.0);
          const double dz = pn / dp;
          z -= dz;
          if (std::abs(dz) < 1e-15) break;
        }
        rule.nodes[static_cast<std::size_t>(k)] = 0.5 * (z + 1.0);
        rule.weights[static_cast<std::size_t>(k)] =
            1.0 / ((1.0 - z * z) * dp * dp);
      }
      t[static_cast<std::size_t>(n)] = std::move(rule);
    }
    return t;
  }();
  return table[static_cast<std::size_t>(q)];
}

}  // namespace detail

/// Gonzalez midpoint discrete gradient:
///   grad V(m) + [V(x') - V(x) - grad V(m)·d] d / ||d||^2,  m=(x+x')/2, d=x'-x,
/// falling back to grad V(x) at coincidence. Satisfies both axioms of the
/// discrete-gradient definition to rounding.
inline StateVector midpoint_discrete_gradient(const ScalarField& V,
                                              const StateVector& x,
                                              const StateVector& xp) {
  detail::require_dimension(xp, static_cast<int>(x.size()),
                            "midpoint_discrete_gradient");
  const StateVector d = xp - x;
  if (d.norm() <= detail::coincidence_threshold(x, xp)) {
    return V.grad(x);
  }
  const StateVector m = 0.5 * (x + xp);
  const StateVector g = V.grad(m);
  const double correction = (V(xp) - V(x) - g.dot(d)) / d.squaredNorm();
  return g + correction * d;
}

/// Itoh-Abe coordinate-increment discrete gradient: component i is the
/// difference quotient of V along the i-th edge of the staircase from x to
/// x', replaced by the exact partial derivative at the midpoint of a
/// degenerate edge. The first axiom holds exactly by telescoping.
inline StateVector coordinate_increment_discrete_gradient(
    const ScalarField& V, const StateVector& x, const StateVector& xp) {
  const int n = static_cast<int>(x.size());
  detail::require_dimension(xp, n, "coordinate_increment_discrete_gradient");
  const double eps = detail::coincidence_threshold(x, xp);
  StateVector out(n);
  StateVector z = x;  // morphs into xp one coordinate at a time
  for (int i = 0; i < n; ++i) {
    const double lo = x[i];
    const double hi = xp[i];
    if (std::abs(hi - lo) <= eps) {
      StateVector zmid = z;
      zmid[i] = 0.5 * (lo + hi);
      out[i] = V.grad(zmid)[i];
    } else {
      StateVector za = z;
      za[i] = hi;
      out[i] = (V(za) - V(z)) / (hi - lo);
    }
    z[i] = hi;
  }
  return out;
}

/// Mean-value (averaged) discrete gradient: Gauss-Legendre approximation of
/// the line integral of grad V from x to x'. Exact (hence axiom-1 exact)
/// when grad V restricted to the segment has polynomial degree <= 2q-1;
/// otherwise accurate to quadrature error only.
inline StateVector mean_value_discrete_gradient(const ScalarField& V,
                                                const StateVector& x,
                                                const StateVector& xp, int q) {
  const int n = static_cast<int>(x.size());
  detail::require_dimension(xp, n, "mean_value_discrete_gradient");
  const StateVector d = xp - x;
  if (d.norm() <= detail::coincidence_threshold(x, xp)) {
    return V.grad(x);
  }
  const auto& rule = detail::gauss_legendre_01(q);
  StateVector acc = StateVector::Zero(n);
  for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
    acc += rule.weights[j] * V.grad(x + rule.nodes[j] * d);
  }
  return acc;
}

/// Dispatch on the scheme tag.
inline StateVector discrete_gradient(const DiscreteGradientScheme& scheme,
                                     const ScalarField& V, const StateVector& x,
                                     const StateVector& xp) {
  switch (scheme.kind) {
    case DiscreteGradientScheme::Kind::Midpoint:
      return midpoint_discrete_gradient(V, x, xp);
    case DiscreteGradientScheme::Kind::CoordinateIncrement:
      return coordinate_increment_discrete_gradient(V, x, xp);
    case DiscreteGradientScheme::Kind::MeanValue:
      return mean_value_discrete_gradient(V, x, xp, scheme.quadrature_points);
  }
  throw InvalidArgumentError("discrete_gradient: unknown scheme");
}

/// Max residuals of the two defining axioms over the sample pairs:
///   axiom1 = max |dgV(x,x')·(x'-x) - (V(x')-V(x))|
///   axiom2 = max ||dgV(x,x) - grad V(x)||
inline std::pair<double, double> check_axioms(
    const DiscreteGradientScheme& scheme, const ScalarField& V,
    const std::vector<std::pair<StateVector, StateVector>>& sample_pairs) {
  double axiom1 = 0.0;
  double axiom2 = 0.0;
  for (const auto& [x, xp] : sample_pairs) {
    const StateVector g = discrete_gradient(scheme, V, x, xp);
    axiom1 = std::max(axiom1,
                      std::abs(g.dot(xp - x) - (V(xp) - V(x))));
    const StateVector gc = discrete_gradient(scheme, V, x, x);
    axiom2 = std::max(axiom2, (gc - V.grad(x)).norm());
  }
  return {axiom1, axiom2};
}

}  // namespace lingrad
