#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "lingrad/multilinear.hpp"
#include "lingrad/reference.hpp"
#include "lingrad/sampling.hpp"
#include "lingrad/stepper.hpp"

using namespace lingrad;

namespace {

StateVector vec3(double a, double b, double c) {
  StateVector v(3);
  v << a, b, c;
  return v;
}

ScalarField rigid_energy(double i1, double i2, double i3) {
  return ScalarField{
      3,
      [=](const StateVector& x) {
        return 0.5 * (x[0] * x[0] / i1 + x[1] * x[1] / i2 + x[2] * x[2] / i3);
      },
      [=](const StateVector& x) {
        return vec3(x[0] / i1, x[1] / i2, x[2] / i3);
      }};
}

ScalarField casimir3() {
  return ScalarField{3,
                     [](const StateVector& x) { return 0.5 * x.squaredNorm(); },
                     [](const StateVector& x) { return StateVector(x); }};
}

TensorField epsilon3_field() {
  TensorField F;
  F.dimension = 3;
  F.order = 3;
  F.value = [](const StateVector&) { return Tensor::levi_civita(3); };
  return F;
}

MultiLinearGradientSystem nambu_rigid_body(double i1 = 1.0, double i2 = 2.0,
                                           double i3 = 3.0) {
  return make_multilinear_system(epsilon3_field(),
                                 {rigid_energy(i1, i2, i3), casimir3()});
}

ScalarField coordinate3(int i) {
  return ScalarField{3, [i](const StateVector& x) { return x[i]; },
                     [i](const StateVector& x) {
                       StateVector g = StateVector::Zero(x.size());
                       g[i] = 1.0;
                       return g;
                     }};
}

Matrix omega_rigid(const StateVector& x) {
  Matrix m(3, 3);
  m << 0.0, x[2], -x[1], -x[2], 0.0, x[0], x[1], -x[0], 0.0;
  return m;
}

}  // namespace

TEST_CASE("tensor indexing, transposition, levi-civita", "[multilinear]") {
  Tensor t(3, 3);
  t.at(0, 1, 2) = 5.0;
  REQUIRE(t.at(0, 1, 2) == 5.0);
  const std::vector<int> idx012{0, 1, 2};
  REQUIRE(t.unflat(t.flat(idx012)) == idx012);
  REQUIRE(t.size() == 27);

  const Tensor sw = t.transposed(0, 2);
  REQUIRE(sw.at(2, 1, 0) == 5.0);
  REQUIRE(sw.at(0, 1, 2) == 0.0);

  const Tensor eps = Tensor::levi_civita(3);
  REQUIRE(eps.at(0, 1, 2) == 1.0);
  REQUIRE(eps.at(1, 0, 2) == -1.0);
  REQUIRE(eps.at(2, 0, 1) == 1.0);
  REQUIRE(eps.at(0, 0, 2) == 0.0);
  REQUIRE(eps.fully_antisymmetric());

  const Tensor eps2 = Tensor::levi_civita(2);
  REQUIRE(eps2.at(0, 1) == 1.0);
  REQUIRE(eps2.at(1, 0) == -1.0);
  REQUIRE(eps2.at(0, 0) == 0.0);

  Tensor symm(2, 2);
  symm.at(0, 1) = 1.0;
  symm.at(1, 0) = 1.0;
  REQUIRE_FALSE(symm.fully_antisymmetric());

  REQUIRE_THROWS_AS(t.at(0, 1, 3), InvalidArgumentError);
  REQUIRE_THROWS_AS(t.at(0, 1), InvalidArgumentError);
  REQUIRE_THROWS_AS(t.transposed(0, 3), InvalidArgumentError);
  REQUIRE_THROWS_AS(Tensor(0, 2), InvalidArgumentError);
}

TEST_CASE("tensor field enforces budget and shape", "[multilinear]") {
  TensorField bad_dim;
  bad_dim.dimension = 9;
  bad_dim.order = 2;
  bad_dim.value = [](const StateVector&) { return Tensor(9, 2); };
  REQUIRE_THROWS_AS(bad_dim(StateVector::Zero(9)), InvalidArgumentError);

  TensorField bad_order;
  bad_order.dimension = 2;
  bad_order.order = 5;
  bad_order.value = [](const StateVector&) { return Tensor(2, 5); };
  REQUIRE_THROWS_AS(bad_order(StateVector::Zero(2)), InvalidArgumentError);

  TensorField mismatch;
  mismatch.dimension = 3;
  mismatch.order = 3;
  mismatch.value = [](const StateVector&) { return Tensor(2, 3); };
  REQUIRE_THROWS_AS(mismatch(StateVector::Zero(3)), InvalidArgumentError);

  TensorField nonfinite;
  nonfinite.dimension = 2;
  nonfinite.order = 2;
  nonfinite.value = [](const StateVector&) {
    Tensor t(2, 2);
    t.at(0, 1) = std::numeric_limits<double>::infinity();
    return t;
  };
  REQUIRE_THROWS_AS(nonfinite(StateVector::Zero(2)), EvaluationDomainError);
}

TEST_CASE("system construction validates antisymmetry and shapes",
          "[multilinear]") {
  REQUIRE_NOTHROW(nambu_rigid_body());

  TensorField symm;
  symm.dimension = 3;
  symm.order = 3;
  symm.value = [](const StateVector&) {
    Tensor t(3, 3);
    t.at(0, 0, 1) = 1.0;
    return t;
  };
  const std::vector<ScalarField> two_coords{coordinate3(0), coordinate3(1)};
  REQUIRE_THROWS_AS(make_multilinear_system(symm, two_coords),
                    InvalidArgumentError);

  // order must be m + 1
  const std::vector<ScalarField> one_v{casimir3()};
  const std::vector<ScalarField> no_v;
  REQUIRE_THROWS_AS(make_multilinear_system(epsilon3_field(), one_v),
                    InvalidArgumentError);
  REQUIRE_THROWS_AS(make_multilinear_system(epsilon3_field(), no_v),
                    InvalidArgumentError);

  ScalarField wrong_dim{2, [](const StateVector& x) { return x[0]; },
                        [](const StateVector& x) {
                          StateVector g = StateVector::Zero(x.size());
                          g[0] = 1.0;
                          return g;
                        }};
  const std::vector<ScalarField> mixed{casimir3(), wrong_dim};
  REQUIRE_THROWS_AS(make_multilinear_system(epsilon3_field(), mixed),
                    InvalidArgumentError);
}

TEST_CASE("rigid body nambu rhs matches pinned values and poisson form",
          "[multilinear]") {
  const auto sys = nambu_rigid_body(1.0, 2.0, 3.0);

  // gradH x gradC at (1,1,1) with I = (1,2,3)
  const StateVector r = multilinear_rhs(sys, vec3(1.0, 1.0, 1.0));
  REQUIRE(r[0] == Catch::Approx(1.0 / 6.0).margin(1e-15));
  REQUIRE(r[1] == Catch::Approx(-2.0 / 3.0).margin(1e-15));
  REQUIRE(r[2] == Catch::Approx(0.5).margin(1e-15));

  // dual route: same flow written as Omega(x) gradH with the Poisson matrix
  const auto energy = rigid_energy(1.0, 2.0, 3.0);
  for (const auto& x : halton_box(3, 100, -2.0, 2.0)) {
    const StateVector a = multilinear_rhs(sys, x);
    const StateVector b = omega_rigid(x) * energy.grad(x);
    REQUIRE((a - b).norm() <= 1e-12 * (1.0 + b.norm()));
  }

  REQUIRE_THROWS_AS(multilinear_rhs(sys, StateVector::Zero(2)),
                    InvalidArgumentError);
}

TEST_CASE("fundamental brackets reproduce tensor entries exactly",
          "[multilinear]") {
  const TensorField eps = epsilon3_field();
  const StateVector x = vec3(0.3, -0.7, 1.1);
  const Tensor eps_val = Tensor::levi_civita(3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) {
        const double b =
            bracket(eps, {coordinate3(i), coordinate3(j), coordinate3(k)}, x);
        REQUIRE(b == eps_val.at(i, j, k));
      }
    }
  }
  const std::vector<ScalarField> too_few{coordinate3(0), coordinate3(1)};
  REQUIRE_THROWS_AS(bracket(eps, too_few, x), InvalidArgumentError);
}

TEST_CASE("repeated slot annihilates the bracket", "[multilinear]") {
  const TensorField eps = epsilon3_field();
  const auto H = rigid_energy(1.0, 2.0, 3.0);
  const auto C = casimir3();
  const std::vector<ScalarField> hhc{H, H, C};
  const std::vector<ScalarField> hcc{H, C, C};
  for (const auto& x : halton_box(3, 50, -2.0, 2.0)) {
    const double scale = 1.0 + H.grad(x).norm() * C.grad(x).norm();
    REQUIRE(std::abs(bracket(eps, hhc, x)) <= 1e-15 * scale);
    REQUIRE(std::abs(bracket(eps, hcc, x)) <= 1e-15 * scale);
  }
}

TEST_CASE("lyapunov bracket W pins and matches the flow derivative",
          "[multilinear]") {
  const auto sys = nambu_rigid_body(1.0, 2.0, 3.0);
  const StateVector x0 = vec3(1.0, 1.0, 1.0);

  // V = x1: W = dV/dt = rhs[0] = 1/6
  REQUIRE(lyapunov_bracket_W(sys, coordinate3(0), x0) ==
          Catch::Approx(1.0 / 6.0).margin(1e-15));

  // repeated slot: both conserved quantities have identically zero W
  for (const auto& x : halton_box(3, 30, -2.0, 2.0)) {
    const double scale = 1.0 + x.squaredNorm();
    REQUIRE(std::abs(lyapunov_bracket_W(sys, sys.V_list[0], x)) <=
            1e-14 * scale);
    REQUIRE(std::abs(lyapunov_bracket_W(sys, sys.V_list[1], x)) <=
            1e-14 * scale);
  }

  // W(V) = gradV . rhs for arbitrary V
  const auto V =
      expr::to_scalar_field(expr::parse("sin(x1) + x2*x3 + x1^2", 3));
  for (const auto& x : halton_box(3, 30, -1.5, 1.5)) {
    const double w = lyapunov_bracket_W(sys, V, x);
    const double dual = V.grad(x).dot(multilinear_rhs(sys, x));
    REQUIRE(w == Catch::Approx(dual).margin(1e-13 * (1.0 + std::abs(dual))));
  }
}

TEST_CASE("slot swap transposes roles and negates alternating tensors",
          "[multilinear]") {
  const TensorField eps = epsilon3_field();
  const StateVector x = vec3(0.4, 0.9, -0.2);

  // fully antisymmetric: swap is -L entrywise
  for (int j = 1; j <= 2; ++j) {
    const Tensor swapped = slot_swap(eps, j)(x);
    const Tensor orig = eps(x);
    for (std::size_t f = 0; f < orig.size(); ++f) {
      REQUIRE(swapped.data()[f] == -orig.data()[f]);
    }
  }

  // order 2: swap is the matrix transpose
  TensorField order2;
  order2.dimension = 2;
  order2.order = 2;
  order2.value = [](const StateVector& y) {
    Tensor t(2, 2);
    t.at(0, 0) = y[0];
    t.at(0, 1) = 1.0;
    t.at(1, 0) = -2.0;
    t.at(1, 1) = y[1];
    return t;
  };
  StateVector p2(2);
  p2 << 0.5, 0.25;
  const Tensor tr = slot_swap(order2, 1)(p2);
  REQUIRE(tr.at(0, 0) == 0.5);
  REQUIRE(tr.at(0, 1) == -2.0);
  REQUIRE(tr.at(1, 0) == 1.0);
  REQUIRE(tr.at(1, 1) == 0.25);

  // role exchange: {A,B,C}_{swap(L,1)} = {B,A,C}_L
  const auto A = expr::to_scalar_field(expr::parse("x1^2 + sin(x2)", 3));
  const auto B = expr::to_scalar_field(expr::parse("x2*x3 + cos(x1)", 3));
  const auto C = expr::to_scalar_field(expr::parse("exp(x3/4) + x1", 3));
  const std::vector<ScalarField> abc{A, B, C};
  const std::vector<ScalarField> bac{B, A, C};
  const TensorField eps_swapped = slot_swap(eps, 1);
  for (const auto& p : halton_box(3, 20, -1.5, 1.5)) {
    const double lhs = bracket(eps_swapped, abc, p);
    const double rhs = bracket(eps, bac, p);
    REQUIRE(lhs == Catch::Approx(rhs).margin(1e-13 * (1.0 + std::abs(rhs))));
  }

  REQUIRE_THROWS_AS(slot_swap(eps, 0), InvalidArgumentError);
  REQUIRE_THROWS_AS(slot_swap(eps, 3), InvalidArgumentError);
}

TEST_CASE("leibniz rule holds for composites", "[multilinear]") {
  const TensorField eps = epsilon3_field();
  const auto g1 = expr::to_scalar_field(expr::parse("sin(x1) + x2^2", 3));
  const auto g2 = expr::to_scalar_field(expr::parse("x3*cos(x2) + x1", 3));
  const auto f1 = expr::to_scalar_field(expr::parse("x1*x2 + x3", 3));
  const auto f2 = expr::to_scalar_field(expr::parse("exp(x2/3) + x1*x3", 3));

  const std::vector<ScalarField> others{f1, f2};
  const std::vector<ScalarField> one_g{g1};
  const std::vector<ScalarField> two_g{g1, g2};

  // product rule phi = g1*g2 in each slot
  const auto phi_prod = expr::parse("x1*x2", 2);
  for (int slot = 1; slot <= 3; ++slot) {
    for (const auto& x : halton_box(3, 10, -1.0, 1.0)) {
      REQUIRE(leibniz_check(eps, others, two_g, phi_prod, slot, x) <= 1e-9);
    }
  }

  // identity composite: residual is pure finite-difference error
  const auto phi_id = expr::parse("x1", 1);
  for (const auto& x : halton_box(3, 10, -1.0, 1.0)) {
    REQUIRE(leibniz_check(eps, others, one_g, phi_id, 2, x) <= 1e-9);
  }

  // constant composite: both sides vanish
  const auto phi_const = expr::parse("3", 1);
  REQUIRE(leibniz_check(eps, others, one_g, phi_const, 1,
                        vec3(0.2, 0.3, 0.4)) <= 1e-15);

  // nonlinear composite phi = sin(y1) + y1*y2^2
  const auto phi_nl = expr::parse("sin(x1) + x1*x2^2", 2);
  for (const auto& x : halton_box(3, 10, -1.0, 1.0)) {
    REQUIRE(leibniz_check(eps, others, two_g, phi_nl, 3, x) <= 1e-9);
  }

  const std::vector<ScalarField> one_other{f1};
  const StateVector origin = vec3(0, 0, 0);
  REQUIRE_THROWS_AS(leibniz_check(eps, one_other, one_g, phi_id, 1, origin),
                    InvalidArgumentError);
  REQUIRE_THROWS_AS(leibniz_check(eps, others, one_g, phi_id, 4, origin),
                    InvalidArgumentError);
  REQUIRE_THROWS_AS(leibniz_check(eps, others, two_g, phi_id, 1, origin),
                    InvalidArgumentError);
}

TEST_CASE("multi step conserves every tracked integral", "[multilinear]") {
  const auto sys = nambu_rigid_body(1.0, 2.0, 3.0);
  const StateVector x0 = vec3(1.0, 0.5, 0.2);
  const double tau = 0.05;
  const int n_steps = 2000;

  const Trajectory traj = multi_integrate(sys, x0, tau, n_steps);
  REQUIRE(traj.states.size() == static_cast<std::size_t>(n_steps) + 1);
  REQUIRE(traj.v_values.size() == 2);

  for (std::size_t j = 0; j < 2; ++j) {
    const double v0 = traj.v_values[j][0];
    double drift = 0.0;
    for (double v : traj.v_values[j]) {
      drift = std::max(drift, std::abs(v - v0));
    }
    REQUIRE(drift <= 1e-9);
  }
}

TEST_CASE("multi step with m = 1 reduces to the discrete gradient step",
          "[multilinear]") {
  // harmonic oscillator as both a matrix system and an order-2 tensor system
  ScalarField V{2,
                [](const StateVector& x) { return 0.5 * x.squaredNorm(); },
                [](const StateVector& x) { return StateVector(x); }};

  LinearGradientSystem mat;
  mat.dimension = 2;
  mat.V = V;
  mat.L = StructureMatrixField{2,
                               [](const StateVector&) {
                                 Matrix J(2, 2);
                                 J << 0.0, 1.0, -1.0, 0.0;
                                 return J;
                               },
                               StructureClass::Antisymmetric};

  TensorField Lt;
  Lt.dimension = 2;
  Lt.order = 2;
  Lt.value = [](const StateVector&) {
    Tensor t(2, 2);
    t.at(0, 1) = 1.0;
    t.at(1, 0) = -1.0;
    return t;
  };
  const auto tsys = make_multilinear_system(Lt, {V});

  StateVector xm(2), xt(2);
  xm << 1.2, -0.3;
  xt = xm;
  for (int k = 0; k < 50; ++k) {
    xm = step(mat, xm, 0.1, DiscreteGradientScheme::midpoint(),
              LTildePolicy::Midpoint)
             .first;
    xt = multi_step(tsys, xt, 0.1).first;
    REQUIRE((xm - xt).norm() <= 1e-12);
  }
}

TEST_CASE("multi step is consistent with the reference flow",
          "[multilinear]") {
  const auto sys = nambu_rigid_body(1.0, 2.0, 3.0);
  const StateVector x0 = vec3(1.0, 0.5, 0.2);
  const double tau = 1e-4;

  const StateVector x1 = multi_step(sys, x0, tau).first;
  VectorField rhs{3, [&sys](const StateVector& x) {
                    return multilinear_rhs(sys, x);
                  }};
  const Trajectory ref = reference_integrate(rhs, x0, tau, 1e-13);
  REQUIRE((x1 - ref.states.back()).norm() <= 1e-7);

  REQUIRE_THROWS_AS(multi_step(sys, x0, 0.0), InvalidArgumentError);
  REQUIRE_THROWS_AS(multi_step(sys, StateVector::Zero(2), 0.1),
                    InvalidArgumentError);
}

TEST_CASE("multi integrate surfaces divergence with the partial prefix",
          "[multilinear]") {
  const auto sys = nambu_rigid_body(1.0, 2.0, 3.0);
  const StateVector x0 = vec3(1.0, 0.5, 0.2);

  SolverConfig starved;
  starved.max_iter = 2;
  bool thrown = false;
  try {
    multi_integrate(sys, x0, 5.0, 10, DiscreteGradientScheme::midpoint(),
                    starved);
  } catch (const IntegrateDivergenceError& e) {
    thrown = true;
    REQUIRE(e.step_index() == 1);
    REQUIRE(e.partial().states.size() == 1);
    REQUIRE(e.partial().v_values.size() == 2);
  }
  REQUIRE(thrown);

  REQUIRE_THROWS_AS(multi_integrate(sys, x0, 0.1, 0), InvalidArgumentError);
}
