#include "doctest.h"

#include <cmath>
#include <random>

#include "wavobs/assembly.hpp"
#include "wavobs/basis.hpp"
#include "wavobs/kernels.hpp"

using namespace wavobs;
using assembly::Formulation;
using assembly::SemiDiscreteSystem;
using kernels::Matrix;
using kernels::Vector;

TEST_CASE("assemble rejects bad input") {
  CHECK_THROWS_AS(assembly::assemble(Formulation::classical(), 3),
                  std::invalid_argument);
  CHECK_THROWS_AS(assembly::assemble(Formulation::nitsche_symmetric(0.0), 8),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      assembly::assemble(Formulation::nitsche_symmetric(
                             std::numeric_limits<double>::infinity()),
                         8),
      std::invalid_argument);
}

TEST_CASE("classical system closed forms") {
  const SemiDiscreteSystem sys = assembly::assemble(Formulation::classical(), 6);
  CHECK(sys.dof == 5);
  CHECK(sys.energy_position.rows == 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      CHECK(sys.energy_position(i, j) == ((i == j) ? 1.0 : 0.0));
  CHECK(sys.energy_velocity(0, 0) == doctest::Approx(2.0 / 5.0));
  CHECK(sys.energy_velocity(1, 1) == doctest::Approx(2.0 / 21.0));
  CHECK(sys.energy_velocity(0, 2) ==
        doctest::Approx(-1.0 / (5.0 * std::sqrt(21.0))));
  CHECK(sys.energy_velocity(2, 0) == sys.energy_velocity(0, 2));
  CHECK(sys.energy_velocity(0, 1) == 0.0);
  // observation row picks the boundary slope of each position mode
  for (int k = 1; k <= 5; ++k) {
    CHECK(sys.observation_row[k - 1] == doctest::Approx(-std::sqrt(k + 0.5)));
    CHECK(sys.observation_row[5 + k - 1] == 0.0);
  }
}

// mass entries must agree with direct quadrature of the basis products
TEST_CASE("classical mass matrix against quadrature") {
  const int N = 10;
  const SemiDiscreteSystem sys = assembly::assemble(Formulation::classical(), N);
  const basis::QuadratureRule rule =
      basis::gauss_legendre(basis::points_for_degree(2 * N));
  for (int i = 1; i < N; ++i)
    for (int j = 1; j < N; ++j) {
      double ip = 0.0;
      for (int q = 0; q < rule.order; ++q)
        ip += rule.weights[q] *
              basis::basis_eval(basis::BasisKind::DirichletBoth, i,
                                rule.nodes[q]).value *
              basis::basis_eval(basis::BasisKind::DirichletBoth, j,
                                rule.nodes[q]).value;
      CHECK(std::fabs(sys.energy_velocity(i - 1, j - 1) - ip) <= 1e-13);
    }
}

TEST_CASE("classical mass matrix SPD up to N=256") {
  for (const int N : {8, 64, 256}) {
    const SemiDiscreteSystem sys =
        assembly::assemble(Formulation::classical(), N);
    CHECK_NOTHROW(kernels::cholesky(sys.energy_velocity));
  }
}

TEST_CASE("mixed system closed forms and coupling") {
  const int N = 6;
  const SemiDiscreteSystem sys = assembly::assemble(Formulation::mixed(), N);
  CHECK(sys.dof == 5);
  // velocity mass is diagonal 2/(2i-1)
  for (int i = 1; i <= 5; ++i) {
    CHECK(sys.energy_velocity(i - 1, i - 1) ==
          doctest::Approx(2.0 / (2.0 * i - 1.0)));
    for (int j = 1; j <= 5; ++j)
      if (i != j) CHECK(sys.energy_velocity(i - 1, j - 1) == 0.0);
  }
  // the state matrix encodes D a' = M b with D(1,1) = sqrt(2)/sqrt(3): feeding
  // b = e_1 must give a' = D^{-1} M e_1, whose first entry is M(1,1)/D(1,1)
  Vector state(10, 0.0);
  state[5] = 1.0;
  const Vector deriv = kernels::matvec(sys.state_matrix, state);
  CHECK(deriv[0] == doctest::Approx(2.0 / (std::sqrt(2.0) / std::sqrt(3.0))));
}

// the first-order coupling means: when the velocity block holds the L2
// projection of position mode 1, the position derivative is exactly e_1
TEST_CASE("mixed system reproduces the velocity identity") {
  const int N = 8;
  const int n = N - 1;
  const SemiDiscreteSystem sys = assembly::assemble(Formulation::mixed(), N);
  const basis::QuadratureRule rule =
      basis::gauss_legendre(basis::points_for_degree(2 * N));
  auto f = [](double x) {
    return basis::basis_eval(basis::BasisKind::DirichletBoth, 1, x).value;
  };
  const std::vector<double> b =
      basis::project(f, basis::BasisKind::PlainLegendre, n, rule);
  Vector state(2 * n, 0.0);
  state[0] = 1.0;  // position = mode 1
  for (int i = 0; i < n; ++i) state[n + i] = b[i];
  const Vector deriv = kernels::matvec(sys.state_matrix, state);
  for (int i = 0; i < n; ++i) {
    const double want = (i == 0) ? 1.0 : 0.0;
    CHECK(std::fabs(deriv[i] - want) <= 1e-12);
  }
}

TEST_CASE("nitsche matrices: closed forms versus quadrature") {
  const int N = 8;
  const double gamma = 0.8;
  const basis::QuadratureRule rule =
      basis::gauss_legendre(basis::points_for_degree(2 * N));
  for (const bool symmetric : {true, false}) {
    const Formulation f = symmetric
                              ? Formulation::nitsche_symmetric(gamma)
                              : Formulation::nitsche_nonsymmetric(gamma);
    const SemiDiscreteSystem sys = assembly::assemble(f, N);
    CHECK(sys.dof == N);

    // mass entries against ∫ basis_i basis_j
    for (int i = 1; i <= N; ++i)
      for (int j = 1; j <= N; ++j) {
        double ip = 0.0;
        for (int q = 0; q < rule.order; ++q)
          ip += rule.weights[q] *
                basis::basis_eval(basis::BasisKind::LeftDirichlet, i,
                                  rule.nodes[q]).value *
                basis::basis_eval(basis::BasisKind::LeftDirichlet, j,
                                  rule.nodes[q]).value;
        CHECK(std::fabs(sys.energy_velocity(i - 1, j - 1) - ip) <= 1e-11);
      }

    // stiffness quadratic form against the quadrature-evaluated bilinear
    // form: ∫ psi'^2 - 2 psi'(1) psi(1) + gamma N^2 psi(1)^2 (symmetric) or
    // ∫ psi'^2 + gamma N^2 psi(1)^2 (the skew couplings cancel)
    std::mt19937 gen(99 + (symmetric ? 1 : 0));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      Vector a(N);
      for (double& v : a) v = u(gen);
      double val1 = 0.0, slope1 = 0.0, bulk = 0.0;
      for (int i = 1; i <= N; ++i) {
        const basis::Eval e =
            basis::basis_eval(basis::BasisKind::LeftDirichlet, i, 1.0);
        val1 += a[i - 1] * e.value;
        slope1 += a[i - 1] * e.derivative;
      }
      for (int q = 0; q < rule.order; ++q) {
        double d = 0.0;
        for (int i = 1; i <= N; ++i)
          d += a[i - 1] * basis::basis_eval(basis::BasisKind::LeftDirichlet, i,
                                            rule.nodes[q]).derivative;
        bulk += rule.weights[q] * d * d;
      }
      const double gN2 = gamma * N * N;
      const double want = symmetric
                              ? bulk - 2.0 * slope1 * val1 + gN2 * val1 * val1
                              : bulk + gN2 * val1 * val1;
      double got = 0.0;  // a^T K a reconstructed from -Me * (lower-left of A)
      const Matrix& A = sys.state_matrix;
      Vector Ka(N, 0.0);
      for (int i = 0; i < N; ++i) {
        double s = 0.0;
        for (int j = 0; j < N; ++j) s += -A(N + i, j) * a[j];
        Ka[i] = s;
      }
      const Vector MKa = kernels::matvec(sys.energy_velocity, Ka);
      got = kernels::dot(a, MKa);
      CHECK(std::fabs(got - want) <= 1e-10 * std::max(1.0, std::fabs(want)));
    }

    // observation row: slope -/+ gamma N^2 * value at x = +1 per mode
    for (int j = 1; j <= N; ++j) {
      const basis::Eval e =
          basis::basis_eval(basis::BasisKind::LeftDirichlet, j, 1.0);
      const double gN2 = gamma * N * N;
      const double want =
          symmetric ? e.derivative - gN2 * e.value : e.derivative + gN2 * e.value;
      CHECK(sys.observation_row[j - 1] == doctest::Approx(want).epsilon(1e-13));
      CHECK(sys.observation_row[N + j - 1] == 0.0);
    }
  }
}

TEST_CASE("nitsche penalty block example") {
  // with both indices odd the boundary product of basis values is 2*2
  const SemiDiscreteSystem sys =
      assembly::assemble(Formulation::nitsche_symmetric(0.8), 8);
  // K(1,3) = P - Q(1,3) - Q(3,1) + gamma N^2 * 4; recover K from A = -M^{-1}K
  const int n = 8;
  Matrix K(n, n);
  {
    Matrix negA(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) negA(i, j) = -sys.state_matrix(n + i, j);
    K = kernels::matmul(sys.energy_velocity, negA);
  }
  const double gN2 = 0.8 * 64.0;
  // P(1,3)=1*2=2, Q(1,3)=12, Q(3,1)=2, R(1,3)=4
  CHECK(K(0, 2) == doctest::Approx(2.0 - 12.0 - 2.0 + gN2 * 4.0).epsilon(1e-12));
}

TEST_CASE("symmetric nitsche stiffness SPD for gamma beyond one half") {
  for (const double gamma : {0.6, 0.8, 1.0, 2.0}) {
    for (const int N : {8, 32, 128}) {
      const SemiDiscreteSystem sys =
          assembly::assemble(Formulation::nitsche_symmetric(gamma), N);
      CHECK_NOTHROW(kernels::cholesky(sys.energy_position));
    }
  }
}

TEST_CASE("energy of simple states") {
  const SemiDiscreteSystem sys = assembly::assemble(Formulation::classical(), 8);
  Vector zero(2 * sys.dof, 0.0);
  CHECK(assembly::energy(sys, zero) == 0.0);
  Vector e1(2 * sys.dof, 0.0);
  e1[0] = 1.0;
  CHECK(assembly::energy(sys, e1) == doctest::Approx(0.5));
  Vector bad(3, 0.0);
  CHECK_THROWS_AS(assembly::energy(sys, bad), std::invalid_argument);
}

TEST_CASE("symmetric nitsche energy equals the boundary-modified functional") {
  const int N = 8;
  const double gamma = 0.8;
  const SemiDiscreteSystem sys =
      assembly::assemble(Formulation::nitsche_symmetric(gamma), N);
  const basis::QuadratureRule rule =
      basis::gauss_legendre(basis::points_for_degree(2 * N));
  std::mt19937 gen(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector state(2 * N);
  for (double& v : state) v = u(gen);

  // direct quadrature of (1/2)∫(u_t^2 + u_x^2) + ((gamma/2)N^2 u(1) - u_x(1)) u(1)
  double bulk = 0.0;
  for (int q = 0; q < rule.order; ++q) {
    double ux = 0.0, ut = 0.0;
    for (int i = 1; i <= N; ++i) {
      const basis::Eval e = basis::basis_eval(basis::BasisKind::LeftDirichlet,
                                              i, rule.nodes[q]);
      ux += state[i - 1] * e.derivative;
      ut += state[N + i - 1] * e.value;
    }
    bulk += rule.weights[q] * (ut * ut + ux * ux);
  }
  double val1 = 0.0, slope1 = 0.0;
  for (int i = 1; i <= N; ++i) {
    const basis::Eval e = basis::basis_eval(basis::BasisKind::LeftDirichlet, i, 1.0);
    val1 += state[i - 1] * e.value;
    slope1 += state[i - 1] * e.derivative;
  }
  const double want =
      0.5 * bulk + (0.5 * gamma * N * N * val1 - slope1) * val1;
  CHECK(assembly::energy(sys, state) ==
        doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("energy conservation of the three conservative flows") {
  const int N = 16;
  const double T = 8.0;
  for (const Formulation& f :
       {Formulation::classical(), Formulation::mixed(),
        Formulation::nitsche_symmetric(0.8)}) {
    const SemiDiscreteSystem sys = assembly::assemble(f, N);
    CHECK(assembly::verify_energy_conservation(sys, T, 8) <= 1e-9);
  }
  const SemiDiscreteSystem bad =
      assembly::assemble(Formulation::nitsche_nonsymmetric(1.0), N);
  CHECK_THROWS_AS(assembly::verify_energy_conservation(bad, T, 8),
                  assembly::UnsupportedFormulationError);
}

TEST_CASE("json serialization round-trips the metadata") {
  const SemiDiscreteSystem sys =
      assembly::assemble(Formulation::nitsche_symmetric(0.8), 8);
  const std::string s = assembly::to_json(sys);
  CHECK(s.find("\"nitsche_sym\"") != std::string::npos);
  CHECK(s.find("\"n_poly\":8") != std::string::npos);
  CHECK(s.find("\"gamma\":0.8") != std::string::npos);
}
