#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lingrad/errors.hpp"

namespace lingrad {

using StateVector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Params = std::map<std::string, double>;

namespace detail {

inline void require_finite(const StateVector& v, const char* what) {
  if (!v.allFinite()) {
    throw EvaluationDomainError(std::string(what) + ": non-finite value");
  }
}

inline void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw EvaluationDomainError(std::string(what) + ": non-finite value");
  }
}

inline void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw EvaluationDomainError(std::string(what) + ": non-finite value");
  }
}

inline void require_dimension(const StateVector& x, int n, const char* what) {
  if (static_cast<int>(x.size()) != n) {
    throw InvalidArgumentError(std::string(what) + ": expected dimension " +
                               std::to_string(n) + ", got " +
                               std::to_string(x.size()));
  }
}

}  // namespace detail

/// V: R^n -> R with its exact gradient. Invariant: gradient agrees with
/// central finite differences of value to relative tolerance 1e-6.
struct ScalarField {
  int dimension = 0;
  std::function<double(const StateVector&)> value;
  std::function<StateVector(const StateVector&)> gradient;

  double operator()(const StateVector& x) const {
    detail::require_dimension(x, dimension, "ScalarField");
    detail::require_finite(x, "ScalarField input");
    const double v = value(x);
    detail::require_finite(v, "ScalarField value");
    return v;
  }

  StateVector grad(const StateVector& x) const {
    detail::require_dimension(x, dimension, "ScalarField");
    detail::require_finite(x, "ScalarField input");
    StateVector g = gradient(x);
    detail::require_dimension(g, dimension, "ScalarField gradient");
    detail::require_finite(g, "ScalarField gradient");
    return g;
  }
};

/// f: R^n -> R^n. Output dimension always equals input dimension.
struct VectorField {
  int dimension = 0;
  std::function<StateVector(const StateVector&)> value;

  StateVector operator()(const StateVector& x) const {
    detail::require_dimension(x, dimension, "VectorField");
    detail::require_finite(x, "VectorField input");
    StateVector y = value(x);
    detail::require_dimension(y, dimension, "VectorField output");
    detail::require_finite(y, "VectorField output");
    return y;
  }
};

/// Symmetry class of L: antisymmetric L conserves V, negative (semi)definite
/// L dissipates it.
enum class StructureClass {
  Antisymmetric,
  NegativeSemidefinite,
  NegativeDefinite,
  Unclassified,
};

inline const char* to_string(StructureClass c) {
  switch (c) {
    case StructureClass::Antisymmetric:
      return "antisymmetric";
    case StructureClass::NegativeSemidefinite:
      return "negative-semidefinite";
    case StructureClass::NegativeDefinite:
      return "negative-definite";
    case StructureClass::Unclassified:
      return "unclassified";
  }
  return "unclassified";
}

/// x -> L(x) with a declared structure class. Invariant: at sampled points
/// the actual class of L(x) is at least as strong as declared_class.
struct StructureMatrixField {
  int dimension = 0;
  std::function<Matrix(const StateVector&)> value;
  StructureClass declared_class = StructureClass::Unclassified;

  Matrix operator()(const StateVector& x) const {
    detail::require_dimension(x, dimension, "StructureMatrixField");
    detail::require_finite(x, "StructureMatrixField input");
    Matrix m = value(x);
    if (m.rows() != dimension || m.cols() != dimension) {
      throw InvalidArgumentError("StructureMatrixField: value is not " +
                                 std::to_string(dimension) + "x" +
                                 std::to_string(dimension));
    }
    detail::require_finite(m, "StructureMatrixField value");
    return m;
  }
};

/// The pairing (L, V), optionally with the raw vector field it represents.
/// Invariant (when raw_f is present): L(x) grad V(x) == raw_f(x) at sampled
/// points with grad V(x) != 0. extra_V lists additional functions tracked
/// along trajectories.
struct LinearGradientSystem {
  int dimension = 0;
  StructureMatrixField L;
  ScalarField V;
  std::optional<VectorField> raw_f;
  Params parameters;
  std::string name;
  std::vector<ScalarField> extra_V;

  /// raw_f when present, otherwise x -> L(x) grad V(x).
  VectorField rhs_field() const {
    if (raw_f) return *raw_f;
    return VectorField{dimension, [L = L, V = V](const StateVector& x) {
                         return StateVector(L(x) * V.grad(x));
                       }};
  }

  /// V followed by extra_V: every function tracked along a trajectory.
  std::vector<ScalarField> tracked_functions() const {
    std::vector<ScalarField> out;
    out.reserve(1 + extra_V.size());
    out.push_back(V);
    for (const auto& v : extra_V) out.push_back(v);
    return out;
  }
};

/// Per-step solver record.
struct StepDiagnostics {
  int iterations = 0;
  double residual = 0.0;
};

/// Timestamped states with the tracked function values and solver
/// diagnostics. All lists have equal length; entry 0 of diagnostics is
/// {0, 0} for the initial state. v_values is indexed
/// [tracked function][step].
struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> states;
  std::vector<std::vector<double>> v_values;
  std::vector<StepDiagnostics> diagnostics;

  std::size_t size() const { return times.size(); }

  void validate() const {
    const std::size_t n = times.size();
    if (states.size() != n || diagnostics.size() != n) {
      throw InvalidArgumentError("Trajectory: list lengths differ");
    }
    for (const auto& vs : v_values) {
      if (vs.size() != n) {
        throw InvalidArgumentError("Trajectory: v_values length differs");
      }
    }
    for (std::size_t k = 1; k < n; ++k) {
      if (!(times[k] > times[k - 1])) {
        throw InvalidArgumentError("Trajectory: times not strictly increasing");
      }
    }
  }
};

/// Classifies M by the sign structure of w^t M w: antisymmetry is checked
/// entrywise on M + M^t, definiteness via the eigenvalues of the symmetric
/// part. Antisymmetric takes precedence when both hold (the zero matrix).
inline StructureClass classify_matrix(const Matrix& M, double tol = 1e-12) {
  if (M.rows() != M.cols() || M.rows() < 1) {
    throw InvalidArgumentError("classify_matrix: matrix must be square");
  }
  if (!M.allFinite()) {
    throw InvalidArgumentError("classify_matrix: non-finite entries");
  }
  if (!(tol > 0)) {
    throw InvalidArgumentError("classify_matrix: tol must be positive");
  }
  const Matrix twice_sym = M + M.transpose();
  if (twice_sym.cwiseAbs().maxCoeff() <= tol) {
    return StructureClass::Antisymmetric;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * twice_sym,
                                           Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  if ((ev.array() < -tol).all()) return StructureClass::NegativeDefinite;
  if ((ev.array() <= tol).all()) return StructureClass::NegativeSemidefinite;
  return StructureClass::Unclassified;
}

/// Strongest class implied by observing both a and b at different points:
/// mixing zero and negative quadratic forms yields a semidefinite field.
inline StructureClass structure_meet(StructureClass a, StructureClass b) {
  using SC = StructureClass;
  if (a == SC::Unclassified || b == SC::Unclassified) return SC::Unclassified;
  if (a == b) return a;
  return SC::NegativeSemidefinite;
}

/// Meet of classify_matrix over a point cloud.
inline StructureClass classify_field(const StructureMatrixField& L,
                                     const std::vector<StateVector>& cloud,
                                     double tol = 1e-12) {
  if (cloud.empty()) return StructureClass::Unclassified;
  StructureClass acc = classify_matrix(L(cloud.front()), tol);
  for (std::size_t i = 1; i < cloud.size(); ++i) {
    acc = structure_meet(acc, classify_matrix(L(cloud[i]), tol));
  }
  return acc;
}

/// Whether `actual` guarantees everything `declared` promises about the sign
/// of w^t L w.
inline bool at_least_as_strong(StructureClass actual, StructureClass declared) {
  using SC = StructureClass;
  switch (declared) {
    case SC::Unclassified:
      return true;
    case SC::NegativeSemidefinite:
      return actual != SC::Unclassified;
    case SC::NegativeDefinite:
      return actual == SC::NegativeDefinite;
    case SC::Antisymmetric:
      return actual == SC::Antisymmetric;
  }
  return false;
}

/// Central-difference gradient of a value map; test oracle for ScalarField
/// consistency.
inline StateVector central_difference_gradient(
    const std::function<double(const StateVector&)>& value,
    const StateVector& x, double h = 1e-6) {
  StateVector g(x.size());
  StateVector xp = x;
  for (int i = 0; i < x.size(); ++i) {
    const double hi = h * (1.0 + std::abs(x[i]));
    xp[i] = x[i] + hi;
    const double fp = value(xp);
    xp[i] = x[i] - hi;
    const double fm = value(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * hi);
  }
  return g;
}

}  // namespace lingrad
