#include "wavobs/hum.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "wavobs/assembly.hpp"
#include "wavobs/basis.hpp"
#include "wavobs/kernels.hpp"
#include "wavobs/observability.hpp"

using namespace wavobs;
using assembly::Formulation;
using assembly::SemiDiscreteSystem;
using kernels::Matrix;
using kernels::Vector;

namespace {

// undamped oscillator written as a one-mode system; one period is 2*pi/omega
SemiDiscreteSystem rotation_toy(double omega) {
  SemiDiscreteSystem sys;
  sys.formulation = Formulation::classical();
  sys.n_poly = 4;  // only sets the default time-sample count
  sys.dof = 1;
  sys.state_matrix = Matrix(2, 2);
  sys.state_matrix(0, 1) = 1.0;
  sys.state_matrix(1, 0) = -omega * omega;
  sys.energy_position = Matrix(1, 1);
  sys.energy_position(0, 0) = omega * omega;
  sys.energy_velocity = Matrix(1, 1);
  sys.energy_velocity(0, 0) = 1.0;
  sys.observation_row = {omega, 0.0};
  return sys;
}

hum::ControlProblem worked_problem() {
  hum::ControlProblem problem;
  problem.y0 = [](double x) { return x + 1.0; };
  problem.y1 = [](double) { return 0.0; };
  problem.T = 8.0;
  return problem;
}

double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

}  // namespace

TEST_CASE("composite Simpson integrates exactly through cubics") {
  // x^3 on [0,1], 4 intervals: Simpson is exact for cubics
  Vector f = {0.0, 1.0 / 64, 8.0 / 64, 27.0 / 64, 1.0};
  CHECK(hum::simpson(f, 0.25) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK_THROWS_AS(hum::simpson({1.0, 2.0}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(hum::simpson({1.0, 2.0, 3.0, 4.0}, 0.5),
                  std::invalid_argument);
}

TEST_CASE("rhs_vector vanishes for zero target data") {
  const auto sys = assembly::assemble(Formulation::classical(), 8);
  hum::ControlProblem problem;
  problem.y0 = [](double) { return 0.0; };
  problem.y1 = [](double) { return 0.0; };
  const Vector b = hum::rhs_vector(problem, sys);
  REQUIRE(b.size() == 14);
  for (double v : b) CHECK(std::abs(v) <= 1e-300);
}

TEST_CASE("rhs_vector reproduces the closed forms for the worked target") {
  // y0 = x+1 pairs only with the first two basis functions of either family
  const auto sys = assembly::assemble(Formulation::classical(), 8);
  const Vector b = hum::rhs_vector(worked_problem(), sys);
  const int d = sys.dof;
  for (int i = 0; i < d; ++i) CHECK(std::abs(b[i]) <= 1e-13);
  CHECK(b[d + 0] ==
        doctest::Approx(-2.0 / std::sqrt(6.0)).epsilon(1e-13));
  CHECK(b[d + 1] ==
        doctest::Approx(-(2.0 / 3.0) / std::sqrt(10.0)).epsilon(1e-13));
  for (int j = 2; j < d; ++j) CHECK(std::abs(b[d + j]) <= 1e-13);
}

TEST_CASE("rhs_vector against a basis function gives a mass-matrix column") {
  const auto sys = assembly::assemble(Formulation::classical(), 10);
  hum::ControlProblem problem;
  problem.y0 = [](double) { return 0.0; };
  problem.y1 = [](double x) {
    return basis::basis_eval(basis::BasisKind::DirichletBoth, 2, x).value;
  };
  const Vector b = hum::rhs_vector(problem, sys);
  const int d = sys.dof;
  for (int i = 0; i < d; ++i)
    CHECK(b[i] == doctest::Approx(sys.energy_velocity(i, 1)).epsilon(1e-12));
  for (int j = 0; j < d; ++j) CHECK(std::abs(b[d + j]) <= 1e-14);
}

TEST_CASE("rhs_vector pairs the mixed velocity block with plain Legendre") {
  const auto sys = assembly::assemble(Formulation::mixed(), 8);
  const Vector b = hum::rhs_vector(worked_problem(), sys);
  const int d = sys.dof;
  for (int i = 0; i < d; ++i) CHECK(std::abs(b[i]) <= 1e-13);
  CHECK(b[d + 0] == doctest::Approx(-2.0).epsilon(1e-13));
  CHECK(b[d + 1] == doctest::Approx(-2.0 / 3.0).epsilon(1e-13));
  for (int j = 2; j < d; ++j) CHECK(std::abs(b[d + j]) <= 1e-12);
}

TEST_CASE("exact example matches its closed forms") {
  const auto exact = hum::exact_example();
  CHECK(exact.T == 8.0);
  CHECK(exact.u0(0.3) == 0.0);
  CHECK(exact.u1(0.5) == doctest::Approx(-0.375).epsilon(1e-15));
  CHECK(exact.u1(-1.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(exact.v(2.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(exact.v(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(exact.v(1.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(exact.v(5.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(exact.v(8.0) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(exact.v(4.0) == 0.0);  // midpoint of the jump limits -1/2 and +1/2

  // L2(0,8) norm^2 of v: two linear pieces contributing 1/3 each
  const auto rule = basis::gauss_legendre(5);
  double integral = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const double t1 = 2.0 * (rule.nodes[q] + 1.0);        // (-1,1) -> (0,4)
    const double t2 = 2.0 * (rule.nodes[q] + 1.0) + 4.0;  // (-1,1) -> (4,8)
    integral += 2.0 * rule.weights[q] *
                (exact.v(t1) * exact.v(t1) + exact.v(t2) * exact.v(t2));
  }
  CHECK(integral == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("solve_control returns the zero control for zero data") {
  const auto sys = assembly::assemble(Formulation::classical(), 8);
  const Matrix W = observability::gramian_chen(sys, 8.0, sys.observation_row);
  hum::ControlProblem problem;
  problem.y0 = [](double) { return 0.0; };
  problem.y1 = [](double) { return 0.0; };
  const auto result = hum::solve_control(problem, sys, sys.observation_row, W);
  CHECK(result.residual == 0.0);
  CHECK(result.l2_norm_v == 0.0);
  for (double v : result.u0_coeffs) CHECK(v == 0.0);
  for (double v : result.u1_coeffs) CHECK(v == 0.0);
  for (double v : result.v_samples) CHECK(v == 0.0);
}

TEST_CASE("solve_control recovers a prescribed state on the rotation toy") {
  const double omega = std::acos(-1.0);
  const auto sys = rotation_toy(omega);
  const double T = 2.0;  // one period
  const Matrix W =
      observability::gramian_chen(sys.state_matrix, sys.observation_row, T);
  const Vector a_true = {0.37, -1.2};
  const Vector b = kernels::matvec(W, a_true);
  const auto result =
      hum::solve_control(b, sys, sys.observation_row, W, T);
  CHECK(result.u0_coeffs[0] == doctest::Approx(0.37).epsilon(1e-10));
  CHECK(result.u1_coeffs[0] == doctest::Approx(-1.2).epsilon(1e-10));
  CHECK_FALSE(result.used_iterative);
  CHECK(result.warning.empty());

  // re-applying the Gramian returns the right-hand side
  Vector a = {result.u0_coeffs[0], result.u1_coeffs[0]};
  const Vector back = kernels::matvec(W, a);
  CHECK(back[0] == doctest::Approx(b[0]).epsilon(1e-10));
  CHECK(back[1] == doctest::Approx(b[1]).epsilon(1e-10));

  CHECK(result.v_samples.front() ==
        doctest::Approx(omega * 0.37).epsilon(1e-12));
  // quadratic-minimum identity: |v|^2 = a.W a = a.b, up to Simpson error
  const double atWa = kernels::dot(a, back);
  const double atb = kernels::dot(a, b);
  CHECK(rel_diff(atWa, atb) <= 1e-10);
  CHECK(rel_diff(result.l2_norm_v * result.l2_norm_v, atb) <= 1e-5);
}

TEST_CASE("worked example on the mixed formulation matches the reference") {
  const auto sys = assembly::assemble(Formulation::mixed(), 16);
  const Matrix W = observability::gramian_chen(sys, 8.0, sys.observation_row);
  const auto result =
      hum::solve_control(worked_problem(), sys, sys.observation_row, W);
  CHECK(result.residual <= 1e-8);
  CHECK(result.warning.empty());

  const auto errors = hum::error_norms(result, sys, hum::exact_example());
  // reference values from an independent implementation of the same pipeline
  CHECK(rel_diff(errors.e_v, 0.21190049736267036) <= 1e-6);
  CHECK(rel_diff(errors.e_u0, 0.005474567775953452) <= 1e-6);
  CHECK(rel_diff(errors.e_u1, 0.0829262986133835) <= 1e-6);
  CHECK(rel_diff(result.l2_norm_v * result.l2_norm_v, 0.6314386230612099) <=
        1e-8);

  // first-order optimality of the quadratic functional: a.W a = a.b
  Vector a = result.u0_coeffs;
  a.insert(a.end(), result.u1_coeffs.begin(), result.u1_coeffs.end());
  const Vector b = hum::rhs_vector(worked_problem(), sys);
  const double atWa = kernels::dot(a, kernels::matvec(W, a));
  const double atb = kernels::dot(a, b);
  CHECK(rel_diff(atWa, atb) <= 1e-8);
}

TEST_CASE("mixed control error decreases from N=16 to N=32") {
  const auto exact = hum::exact_example();
  double ev16 = 0.0, ev32 = 0.0;
  {
    const auto sys = assembly::assemble(Formulation::mixed(), 16);
    const Matrix W =
        observability::gramian_chen(sys, 8.0, sys.observation_row);
    const auto r = hum::solve_control(worked_problem(), sys,
                                      sys.observation_row, W);
    ev16 = hum::error_norms(r, sys, exact).e_v;
  }
  {
    const auto sys = assembly::assemble(Formulation::mixed(), 32);
    const Matrix W =
        observability::gramian_chen(sys, 8.0, sys.observation_row);
    const auto r = hum::solve_control(worked_problem(), sys,
                                      sys.observation_row, W);
    ev32 = hum::error_norms(r, sys, exact).e_v;
  }
  CHECK(rel_diff(ev32, 0.14872882117317757) <= 1e-6);
  CHECK(ev32 < ev16);
}

TEST_CASE("symmetric Nitsche control matches reference and satisfies duality") {
  const auto sys =
      assembly::assemble(Formulation::nitsche_symmetric(1.0), 16);
  const Matrix W = observability::gramian_chen(sys, 8.0, sys.observation_row);
  {
    const auto coarse =
        hum::solve_control(worked_problem(), sys, sys.observation_row, W);
    CHECK(coarse.residual <= 1e-8);
    const auto errors = hum::error_norms(coarse, sys, hum::exact_example());
    CHECK(rel_diff(errors.e_v, 0.224830355011806) <= 1e-6);
  }
  const int n_t = 8192;  // fine grid so Simpson resolves the fastest mode
  const auto result = hum::solve_control(worked_problem(), sys,
                                         sys.observation_row, W, n_t);

  // duality identity against a deterministic test trajectory:
  // int_0^T v(t) * (-obs . e^{At} x) dt  =  -x . b
  const int n = 2 * sys.dof;
  Vector x(n);
  for (int i = 0; i < n; ++i) x[i] = std::sin(3.7 * i + 0.5);
  double xn = kernels::norm2(x);
  for (double& v : x) v /= xn;
  const double h = result.t_samples[1];
  const Matrix step = kernels::expm(sys.state_matrix, h);
  Vector g(result.v_samples.size());
  Vector state = x;
  g[0] = result.v_samples[0] * -kernels::dot(sys.observation_row, state);
  for (std::size_t j = 1; j < g.size(); ++j) {
    state = kernels::matvec(step, state);
    g[j] = result.v_samples[j] * -kernels::dot(sys.observation_row, state);
  }
  const double lhs = hum::simpson(g, h);
  const Vector b = hum::rhs_vector(worked_problem(), sys);
  const double rhs = -kernels::dot(x, b);
  CHECK(std::abs(lhs - rhs) <=
        1e-6 * std::max(std::abs(rhs), 0.1 * kernels::norm2(b)));
}

TEST_CASE("classical control solves with the expected larger error") {
  const auto sys = assembly::assemble(Formulation::classical(), 16);
  const Matrix W = observability::gramian_chen(sys, 8.0, sys.observation_row);
  const auto result =
      hum::solve_control(worked_problem(), sys, sys.observation_row, W);
  CHECK(result.residual <= 1e-8);
  const auto errors = hum::error_norms(result, sys, hum::exact_example());
  CHECK(rel_diff(errors.e_v, 0.42532748337175874) <= 1e-6);
}

TEST_CASE("error_norms in self-comparison is zero") {
  const auto sys = assembly::assemble(Formulation::mixed(), 12);
  const Matrix W = observability::gramian_chen(sys, 8.0, sys.observation_row);
  const auto result =
      hum::solve_control(worked_problem(), sys, sys.observation_row, W);

  hum::ExactSolution self;
  self.T = 8.0;
  self.u0 = [&](double x) {
    double s = 0.0;
    for (std::size_t k = 0; k < result.u0_coeffs.size(); ++k)
      s += result.u0_coeffs[k] *
           basis::basis_eval(basis::BasisKind::DirichletBoth,
                             static_cast<int>(k) + 1, x)
               .value;
    return s;
  };
  self.u0_dx = [&](double x) {
    double s = 0.0;
    for (std::size_t k = 0; k < result.u0_coeffs.size(); ++k)
      s += result.u0_coeffs[k] *
           basis::basis_eval(basis::BasisKind::DirichletBoth,
                             static_cast<int>(k) + 1, x)
               .derivative;
    return s;
  };
  self.u1 = [&](double x) {
    double s = 0.0;
    for (std::size_t k = 0; k < result.u1_coeffs.size(); ++k)
      s += result.u1_coeffs[k] *
           basis::basis_eval(basis::BasisKind::PlainLegendre,
                             static_cast<int>(k), x)
               .value;
    return s;
  };
  const double h = result.t_samples[1];
  self.v = [&](double t) {
    const auto j = static_cast<std::size_t>(std::llround(t / h));
    return result.v_samples[j];
  };
  const auto errors = hum::error_norms(result, sys, self);
  CHECK(errors.e_u0 <= 1e-12);
  CHECK(errors.e_u1 <= 1e-12);
  CHECK(errors.e_v <= 1e-12);

  // and against exact zero data the position error is exactly the seminorm
  hum::ExactSolution zero = hum::exact_example();
  auto zero_errors = hum::error_norms(result, sys, zero);
  CHECK(zero_errors.e_u0 ==
        doctest::Approx(kernels::norm2(result.u0_coeffs)).epsilon(1e-10));
}

TEST_CASE("shifting one unit-seminorm coefficient moves e_u0 by at most it") {
  const auto sys = assembly::assemble(Formulation::mixed(), 12);
  const Matrix W = observability::gramian_chen(sys, 8.0, sys.observation_row);
  auto result =
      hum::solve_control(worked_problem(), sys, sys.observation_row, W);
  const auto exact = hum::exact_example();
  const double e0 = hum::error_norms(result, sys, exact).e_u0;
  result.u0_coeffs[0] += 0.5;
  const double e0_shifted = hum::error_norms(result, sys, exact).e_u0;
  CHECK(std::abs(e0_shifted - e0) <= 0.5 + 1e-12);
}

TEST_CASE("solve_control validates its inputs") {
  const auto sys = assembly::assemble(Formulation::classical(), 8);
  const Matrix W = observability::gramian_chen(sys, 8.0, sys.observation_row);
  const Vector good(2 * sys.dof, 0.0);
  CHECK_THROWS_AS(hum::solve_control(Vector(3, 0.0), sys, sys.observation_row,
                                     W, 8.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      hum::solve_control(good, sys, Vector(3, 0.0), W, 8.0),
      std::invalid_argument);
  CHECK_THROWS_AS(hum::solve_control(good, sys, sys.observation_row, W, 0.0),
                  std::invalid_argument);
  hum::ControlProblem bad = worked_problem();
  bad.T = -1.0;
  CHECK_THROWS_AS(hum::solve_control(bad, sys, sys.observation_row, W),
                  std::invalid_argument);
}

TEST_CASE("an unobservable system raises the near-singular diagnosis") {
  auto sys = rotation_toy(1.0);
  sys.observation_row = {0.0, 0.0};  // observation sees nothing: W = 0
  const Matrix W = observability::gramian_chen(
      sys.state_matrix, sys.observation_row, 2.0);
  const Vector b = {1.0, 0.5};
  try {
    hum::solve_control(b, sys, sys.observation_row, W, 2.0);
    FAIL("expected NearSingularGramianError");
  } catch (const hum::NearSingularGramianError& e) {
    CHECK(std::abs(e.smallest_eigenvalue) <= 1e-12);
  }
}
