#pragma once

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "lingrad/core.hpp"
#include "lingrad/errors.hpp"
#include "lingrad/expr.hpp"
#include "lingrad/multilinear.hpp"

namespace lingrad {

using AnySystem = std::variant<LinearGradientSystem, MultiLinearGradientSystem>;

struct ParamSpec {
  std::string name;
  double default_value = 0.0;
  std::string description;
};

struct CatalogEntry {
  std::string name;
  std::string description;
  int dimension = 0;
  bool multilinear = false;
  std::vector<ParamSpec> params;
};

inline const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = {
      {"pendulum", "planar pendulum, V = x2^2/2 - cos(x1), L = J", 2, false,
       {}},
      {"rigid-body",
       "free rigid body angular momentum, Poisson matrix form", 3, false,
       {{"I1", 1.0, "moment of inertia, > 0"},
        {"I2", 2.0, "moment of inertia, > 0"},
        {"I3", 3.0, "moment of inertia, > 0"}}},
      {"rigid-body-nambu",
       "free rigid body as a bilinear Nambu system conserving energy and "
       "Casimir",
       3, true,
       {{"I1", 1.0, "moment of inertia, > 0"},
        {"I2", 2.0, "moment of inertia, > 0"},
        {"I3", 3.0, "moment of inertia, > 0"}}},
      {"lotka-volterra",
       "three-species Lotka-Volterra system in log variables", 3, false,
       {{"B", 1.0, "coupling parameter"}}},
      {"gradient-example", "double-well gradient flow, L = -Id", 2, false, {}},
      {"lyapunov-example",
       "cubically damped rotation with Lyapunov function x1^2 + x2^2", 2,
       false, {}},
      {"damped-particle",
       "particle in a 1D potential with friction; potential overridable", 2,
       false,
       {{"alpha", 1.0, "friction coefficient, >= 0"}}},
      {"wind-oscillation",
       "averaged wind-induced oscillation with damping and detuning", 2,
       false,
       {{"zeta", 0.5, "damping factor, >= 0"},
        {"lambda", 0.5, "detuning parameter"}}},
      {"wind-degenerate-integral",
       "zero-damping, zero-detuning wind system with its first integral", 2,
       false, {}},
      {"wind-degenerate-lyapunov",
       "zero-damping, zero-detuning wind system with its Lyapunov function",
       2, false, {}},
  };
  return entries;
}

namespace detail {

inline const CatalogEntry& catalog_entry(const std::string& name) {
  for (const auto& e : catalog()) {
    if (e.name == name) return e;
  }
  std::string known;
  for (const auto& e : catalog()) {
    if (!known.empty()) known += ", ";
    known += e.name;
  }
  throw InvalidArgumentError("unknown system '" + name +
                             "'; catalog: " + known);
}

/// Defaults filled in, unknown keys rejected.
inline Params resolve_params(const CatalogEntry& entry, const Params& user) {
  Params out;
  for (const auto& spec : entry.params) out[spec.name] = spec.default_value;
  for (const auto& [key, value] : user) {
    if (out.find(key) == out.end()) {
      throw InvalidArgumentError("system '" + entry.name +
                                 "' has no parameter '" + key + "'");
    }
    out[key] = value;
  }
  return out;
}

inline StructureMatrixField constant_L(int n, Matrix value,
                                       StructureClass declared) {
  return StructureMatrixField{
      n, [value = std::move(value)](const StateVector&) { return value; },
      declared};
}

inline ScalarField rigid_energy_field(double i1, double i2, double i3) {
  return ScalarField{
      3,
      [=](const StateVector& x) {
        return 0.5 * (x[0] * x[0] / i1 + x[1] * x[1] / i2 + x[2] * x[2] / i3);
      },
      [=](const StateVector& x) {
        StateVector g(3);
        g << x[0] / i1, x[1] / i2, x[2] / i3;
        return g;
      }};
}

inline ScalarField casimir_field() {
  return ScalarField{3,
                     [](const StateVector& x) { return 0.5 * x.squaredNorm(); },
                     [](const StateVector& x) { return StateVector(x); }};
}

/// Euler equations written independently of L grad V so reconstruction
/// tests compare two genuinely different routes.
inline VectorField rigid_raw_f(double i1, double i2, double i3) {
  const Params c{{"c1", 1.0 / i2 - 1.0 / i3},
                 {"c2", 1.0 / i3 - 1.0 / i1},
                 {"c3", 1.0 / i1 - 1.0 / i2}};
  const std::vector<std::string> names{"c1", "c2", "c3"};
  return expr::to_vector_field({expr::parse("c1*x2*x3", 3, names),
                                expr::parse("c2*x1*x3", 3, names),
                                expr::parse("c3*x1*x2", 3, names)},
                               c);
}

inline LinearGradientSystem make_pendulum() {
  LinearGradientSystem sys;
  sys.dimension = 2;
  sys.name = "pendulum";
  sys.V = expr::to_scalar_field(expr::parse("0.5*x2^2 - cos(x1)", 2));
  Matrix J(2, 2);
  J << 0.0, 1.0, -1.0, 0.0;
  sys.L = constant_L(2, J, StructureClass::Antisymmetric);
  sys.raw_f = expr::to_vector_field(
      {expr::parse("x2", 2), expr::parse("-sin(x1)", 2)});
  return sys;
}

inline LinearGradientSystem make_rigid_body(const Params& p) {
  const double i1 = p.at("I1"), i2 = p.at("I2"), i3 = p.at("I3");
  if (!(i1 > 0.0) || !(i2 > 0.0) || !(i3 > 0.0)) {
    throw InvalidArgumentError("rigid-body: moments of inertia must be > 0");
  }
  LinearGradientSystem sys;
  sys.dimension = 3;
  sys.name = "rigid-body";
  sys.parameters = p;
  sys.V = rigid_energy_field(i1, i2, i3);
  sys.extra_V = {casimir_field()};
  sys.L = StructureMatrixField{3,
                               [](const StateVector& x) {
                                 Matrix m(3, 3);
                                 m << 0.0, x[2], -x[1], -x[2], 0.0, x[0],
                                     x[1], -x[0], 0.0;
                                 return m;
                               },
                               StructureClass::Antisymmetric};
  sys.raw_f = rigid_raw_f(i1, i2, i3);
  return sys;
}

inline MultiLinearGradientSystem make_rigid_body_nambu(const Params& p) {
  const double i1 = p.at("I1"), i2 = p.at("I2"), i3 = p.at("I3");
  if (!(i1 > 0.0) || !(i2 > 0.0) || !(i3 > 0.0)) {
    throw InvalidArgumentError(
        "rigid-body-nambu: moments of inertia must be > 0");
  }
  TensorField eps;
  eps.dimension = 3;
  eps.order = 3;
  eps.value = [](const StateVector&) { return Tensor::levi_civita(3); };
  MultiLinearGradientSystem sys = make_multilinear_system(
      eps, {rigid_energy_field(i1, i2, i3), casimir_field()});
  sys.name = "rigid-body-nambu";
  sys.parameters = p;
  sys.raw_f = rigid_raw_f(i1, i2, i3);
  return sys;
}

inline LinearGradientSystem make_lotka_volterra(const Params& p) {
  LinearGradientSystem sys;
  sys.dimension = 3;
  sys.name = "lotka-volterra";
  sys.parameters = p;
  sys.V = expr::to_scalar_field(
      expr::parse("exp(x2 - x1) + B*(x2 - x1) - x3", 3, {"B"}), p);
  sys.L = StructureMatrixField{3,
                               [](const StateVector& x) {
                                 const double e1 = std::exp(x[0]);
                                 const double e3 = std::exp(x[2]);
                                 Matrix m(3, 3);
                                 m << 0.0, 0.0, -e3, 0.0, 0.0, -e1 - e3, e3,
                                     e1 + e3, 0.0;
                                 return m;
                               },
                               StructureClass::Antisymmetric};
  sys.raw_f = expr::to_vector_field(
      {expr::parse("exp(x3)", 3), expr::parse("exp(x1) + exp(x3)", 3),
       expr::parse("B*exp(x1) + exp(x2)", 3, {"B"})},
      p);
  return sys;
}

inline LinearGradientSystem make_gradient_example() {
  LinearGradientSystem sys;
  sys.dimension = 2;
  sys.name = "gradient-example";
  sys.V = expr::to_scalar_field(expr::parse("x1^2*(x1 - 1)^2 + x2^2", 2));
  sys.L = constant_L(2, -Matrix::Identity(2, 2),
                     StructureClass::NegativeDefinite);
  sys.raw_f = expr::to_vector_field(
      {expr::parse("-2*x1*(x1 - 1)*(2*x1 - 1)", 2),
       expr::parse("-2*x2", 2)});
  return sys;
}

/// Cubically damped rotation. The printed coefficients of the source
/// material satisfy L grad V = 2f with V = x1^2 + x2^2, so the stored a, b
/// carry a factor 1/2 to restore the defining relation.
inline LinearGradientSystem make_lyapunov_example() {
  LinearGradientSystem sys;
  sys.dimension = 2;
  sys.name = "lyapunov-example";
  sys.V = expr::to_scalar_field(expr::parse("x1^2 + x2^2", 2));
  sys.L = StructureMatrixField{
      2,
      [](const StateVector& x) {
        const double ss = x.squaredNorm();
        if (ss <= 0.0) {
          throw EvaluationDomainError(
              "lyapunov-example: L undefined at the origin");
        }
        const double x1 = x[0], x2 = x[1];
        const double a =
            -(x1 * x1 * x1 * x1 + x2 * x2 * x2 * x2) / (2.0 * ss);
        const double b =
            -(ss + x2 * x1 * x1 * x1 - x1 * x2 * x2 * x2) / (2.0 * ss);
        Matrix m(2, 2);
        m << a, b, -b, a;
        return m;
      },
      StructureClass::NegativeDefinite};
  sys.raw_f = expr::to_vector_field(
      {expr::parse("-x2 - x1^3", 2), expr::parse("x1 - x2^3", 2)});
  return sys;
}

inline LinearGradientSystem make_damped_particle(const Params& p,
                                                 const std::string& potential) {
  const double alpha = p.at("alpha");
  if (!(alpha >= 0.0)) {
    throw InvalidArgumentError("damped-particle: alpha must be >= 0");
  }
  const std::string pot_src = potential.empty() ? "1 - cos(x1)" : potential;
  const expr::Expression pot = expr::parse(pot_src, 1);
  const expr::Expression dpot = expr::differentiate(pot, 1);

  LinearGradientSystem sys;
  sys.dimension = 2;
  sys.name = "damped-particle";
  sys.parameters = p;
  auto pot_at = [pot](double x1) {
    StateVector y(1);
    y << x1;
    return expr::evaluate(pot, y);
  };
  auto dpot_at = [dpot](double x1) {
    StateVector y(1);
    y << x1;
    return expr::evaluate(dpot, y);
  };
  sys.V = ScalarField{2,
                      [pot_at](const StateVector& x) {
                        return 0.5 * x[1] * x[1] + pot_at(x[0]);
                      },
                      [dpot_at](const StateVector& x) {
                        StateVector g(2);
                        g << dpot_at(x[0]), x[1];
                        return g;
                      }};
  Matrix L(2, 2);
  L << 0.0, 1.0, -1.0, -alpha;
  sys.L = constant_L(2, L,
                     alpha == 0.0 ? StructureClass::Antisymmetric
                                  : StructureClass::NegativeSemidefinite);
  sys.raw_f = VectorField{2, [dpot_at, alpha](const StateVector& x) {
                            StateVector f(2);
                            f << x[1], -dpot_at(x[0]) - alpha * x[1];
                            return f;
                          }};
  return sys;
}

inline LinearGradientSystem make_wind_oscillation(const Params& p) {
  const double zeta = p.at("zeta");
  const double lambda = p.at("lambda");
  if (!(zeta >= 0.0)) {
    throw InvalidArgumentError("wind-oscillation: zeta must be >= 0");
  }
  // zeta = rho cos(theta), lambda = rho sin(theta); the quotients keep
  // cos(theta) exactly zero in the conservative limit zeta = 0.
  const double rho = std::hypot(zeta, lambda);
  const double costheta = rho > 0.0 ? zeta / rho : 1.0;
  const double sintheta = rho > 0.0 ? lambda / rho : 0.0;

  LinearGradientSystem sys;
  sys.dimension = 2;
  sys.name = "wind-oscillation";
  sys.parameters = p;
  const Params bound{
      {"rho", rho}, {"st", sintheta}, {"ct", costheta}};
  sys.V = expr::to_scalar_field(
      expr::parse("0.5*rho*(x1^2 + x2^2) - 0.5*st*(x1*x2^2 - x1^3/3) "
                  "+ 0.5*ct*(x2^3/3 - x1^2*x2)",
                  2, {"rho", "st", "ct"}),
      bound);
  Matrix L(2, 2);
  L << -costheta, -sintheta, sintheta, -costheta;
  sys.L = constant_L(2, L,
                     costheta > 0.0 ? StructureClass::NegativeDefinite
                                    : StructureClass::Antisymmetric);
  const std::vector<std::string> zl{"zeta", "lambda"};
  sys.raw_f = expr::to_vector_field(
      {expr::parse("-zeta*x1 - lambda*x2 + x1*x2", 2, zl),
       expr::parse("lambda*x1 - zeta*x2 + 0.5*(x1^2 - x2^2)", 2, zl)},
      p);
  return sys;
}

inline VectorField wind_degenerate_raw_f() {
  return expr::to_vector_field(
      {expr::parse("x1*x2", 2), expr::parse("0.5*(x1^2 - x2^2)", 2)});
}

inline ScalarField wind_V1() {
  return expr::to_scalar_field(expr::parse("0.5*(x1*x2^2 - x1^3/3)", 2));
}

inline ScalarField wind_V2() {
  return expr::to_scalar_field(expr::parse("0.5*(x2^3/3 - x1^2*x2)", 2));
}

inline LinearGradientSystem make_wind_degenerate_integral() {
  LinearGradientSystem sys;
  sys.dimension = 2;
  sys.name = "wind-degenerate-integral";
  sys.V = wind_V1();
  sys.extra_V = {wind_V2()};
  Matrix J(2, 2);
  J << 0.0, 1.0, -1.0, 0.0;
  sys.L = constant_L(2, J, StructureClass::Antisymmetric);
  sys.raw_f = wind_degenerate_raw_f();
  return sys;
}

inline LinearGradientSystem make_wind_degenerate_lyapunov() {
  LinearGradientSystem sys;
  sys.dimension = 2;
  sys.name = "wind-degenerate-lyapunov";
  sys.V = wind_V2();
  sys.extra_V = {wind_V1()};
  sys.L = constant_L(2, -Matrix::Identity(2, 2),
                     StructureClass::NegativeDefinite);
  sys.raw_f = wind_degenerate_raw_f();
  return sys;
}

}  // namespace detail

/// Builds a catalog system by name. `potential` is the exprlang override
/// for damped-particle's f(x1); other systems reject it.
inline AnySystem builtin(const std::string& name, const Params& params = {},
                         const std::string& potential = "") {
  const CatalogEntry& entry = detail::catalog_entry(name);
  const Params p = detail::resolve_params(entry, params);
  if (!potential.empty() && name != "damped-particle") {
    throw InvalidArgumentError("system '" + name +
                               "' does not take a potential expression");
  }
  if (name == "pendulum") return detail::make_pendulum();
  if (name == "rigid-body") return detail::make_rigid_body(p);
  if (name == "rigid-body-nambu") return detail::make_rigid_body_nambu(p);
  if (name == "lotka-volterra") return detail::make_lotka_volterra(p);
  if (name == "gradient-example") return detail::make_gradient_example();
  if (name == "lyapunov-example") return detail::make_lyapunov_example();
  if (name == "damped-particle") {
    return detail::make_damped_particle(p, potential);
  }
  if (name == "wind-oscillation") return detail::make_wind_oscillation(p);
  if (name == "wind-degenerate-integral") {
    return detail::make_wind_degenerate_integral();
  }
  return detail::make_wind_degenerate_lyapunov();
}

/// Convenience accessor for the matrix-form entries.
inline LinearGradientSystem builtin_linear(const std::string& name,
                                           const Params& params = {},
                                           const std::string& potential = "") {
  AnySystem sys = builtin(name, params, potential);
  if (auto* lin = std::get_if<LinearGradientSystem>(&sys)) {
    return std::move(*lin);
  }
  throw InvalidArgumentError("system '" + name +
                             "' is multilinear; use builtin()");
}

}  // namespace lingrad
