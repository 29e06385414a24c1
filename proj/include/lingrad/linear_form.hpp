#pragma once

#include <cmath>
#include <vector>

#include "lingrad/core.hpp"
#include "lingrad/errors.hpp"
#include "lingrad/sampling.hpp"

namespace lingrad {

/// Explicit linear-gradient representation: with v = grad_v and s = f·v,
///   L_ij = (f_i v_j - v_i f_j + delta_ij s) / ||v||^2
/// so L v = f and w'Lw = ||w||^2 s / ||v||^2 for every w (the class follows
/// the sign of f·v). Undefined where the gradient vanishes.
inline Matrix default_L(const StateVector& f_val, const StateVector& grad_v,
                        double epsilon_grad = 1e-12) {
  if (f_val.size() != grad_v.size() || f_val.size() == 0) {
    throw InvalidArgumentError("default_L: f and grad V sizes differ");
  }
  detail::require_finite(f_val, "default_L f");
  detail::require_finite(grad_v, "default_L grad V");
  const double norm = grad_v.norm();
  if (!(norm > epsilon_grad)) {
    throw GradientTooSmallError(
        "default_L: gradient norm " + std::to_string(norm) +
        " at or below threshold " + std::to_string(epsilon_grad));
  }
  const double ss = grad_v.squaredNorm();
  Matrix L = f_val * grad_v.transpose() - grad_v * f_val.transpose();
  L.diagonal().array() += f_val.dot(grad_v);
  L /= ss;
  return L;
}

/// Wraps f and V into a system whose L field is the pointwise default_L.
/// The declared class is detected by sampling the sign of f·grad V over
/// `cloud` (1000 Halton points in [-2,2]^n when empty): all |f·v| <= tol
/// means antisymmetric; all f·v <= tol means negative semidefinite, refined
/// to negative definite when f·v < -tol wherever f is nonzero. The detector
/// sees only the sampled points; degeneracy on measure-zero sets (for
/// example f·v = 0 on a line) can therefore report definite rather than
/// semidefinite.
inline LinearGradientSystem build_linear_gradient_system(
    const VectorField& f, const ScalarField& V, double epsilon_grad = 1e-12,
    std::vector<StateVector> cloud = {}, double class_tol = 1e-10) {
  const int n = f.dimension;
  if (V.dimension != n) {
    throw InvalidArgumentError(
        "build_linear_gradient_system: dimensions disagree");
  }
  if (!(class_tol > 0.0)) {
    throw InvalidArgumentError(
        "build_linear_gradient_system: class_tol must be positive");
  }
  if (cloud.empty()) cloud = halton_box(n, 1000, -2.0, 2.0);

  bool all_zero = true;
  bool all_nonpositive = true;
  bool negative_wherever_f = true;
  int usable = 0;
  for (const auto& x : cloud) {
    StateVector fx, vx;
    try {
      fx = f(x);
      vx = V.grad(x);
    } catch (const EvaluationDomainError&) {
      continue;
    }
    if (!(vx.norm() > epsilon_grad)) continue;
    ++usable;
    const double s = fx.dot(vx);
    if (std::abs(s) > class_tol) all_zero = false;
    if (s > class_tol) all_nonpositive = false;
    if (fx.norm() > class_tol && !(s < -class_tol)) negative_wherever_f = false;
  }
  StructureClass cls = StructureClass::Unclassified;
  if (usable > 0) {
    if (all_zero) {
      cls = StructureClass::Antisymmetric;
    } else if (all_nonpositive && negative_wherever_f) {
      cls = StructureClass::NegativeDefinite;
    } else if (all_nonpositive) {
      cls = StructureClass::NegativeSemidefinite;
    }
  }

  StructureMatrixField L{
      n,
      [f, V, epsilon_grad](const StateVector& x) {
        return default_L(f(x), V.grad(x), epsilon_grad);
      },
      cls};
  LinearGradientSystem sys;
  sys.dimension = n;
  sys.L = std::move(L);
  sys.V = V;
  sys.raw_f = f;
  return sys;
}

/// Coordinate congruence L -> dC L dC'. Any invertible dC preserves the
/// structure class.
inline Matrix transform_L(const Matrix& L, const Matrix& dC,
                          double det_tol = 1e-12) {
  if (L.rows() != L.cols() || dC.rows() != dC.cols() ||
      L.rows() != dC.rows() || L.rows() == 0) {
    throw InvalidArgumentError("transform_L: shapes must be equal and square");
  }
  detail::require_finite(L, "transform_L L");
  detail::require_finite(dC, "transform_L dC");
  const double det = dC.determinant();
  if (!(std::abs(det) > det_tol)) {
    throw InvalidArgumentError("transform_L: dC is singular (|det| = " +
                               std::to_string(std::abs(det)) + ")");
  }
  return dC * L * dC.transpose();
}

/// Max absolute residual of the Jacobi identity
///   sum_k O_jk d_k O_lm + O_lk d_k O_mj + O_mk d_k O_jl
/// over all (j,l,m), with central differences for the derivatives.
/// Assumes Omega(x) antisymmetric.
inline double verify_jacobi(const StructureMatrixField& Omega,
                            const StateVector& x, double fd_step = 1e-5) {
  const int n = Omega.dimension;
  detail::require_dimension(x, n, "verify_jacobi");
  if (!(fd_step > 0.0)) {
    throw InvalidArgumentError("verify_jacobi: fd_step must be positive");
  }
  const Matrix O = Omega(x);
  // partial[k](j,l) approximates d O_jl / d x_k.
  std::vector<Matrix> partial;
  partial.reserve(n);
  for (int k = 0; k < n; ++k) {
    const double h = fd_step * (1.0 + std::abs(x[k]));
    StateVector xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    partial.push_back((Omega(xp) - Omega(xm)) / (2.0 * h));
  }
  double worst = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int l = 0; l < n; ++l) {
      for (int m = 0; m < n; ++m) {
        double r = 0.0;
        for (int k = 0; k < n; ++k) {
          r += O(j, k) * partial[k](l, m);
          r += O(l, k) * partial[k](m, j);
          r += O(m, k) * partial[k](j, l);
        }
        worst = std::max(worst, std::abs(r));
      }
    }
  }
  return worst;
}

}  // namespace lingrad
