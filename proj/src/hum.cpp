#include "wavobs/hum.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>

#include "wavobs/basis.hpp"
#include "wavobs/observability.hpp"

namespace wavobs::hum {

using assembly::FormulationKind;
using assembly::SemiDiscreteSystem;
using kernels::Matrix;
using kernels::Vector;

namespace {

// Trial-basis evaluation for the position and velocity blocks of each
// formulation. Position: integrated-Legendre for Classical/Mixed,
// left-Dirichlet Legendre for the Nitsche variants. Velocity: same as the
// position basis except for Mixed, whose second block carries plain Legendre
// coefficients (its diagonal mass 2/(2i-1) is the plain-Legendre norm).
basis::Eval position_basis(const SemiDiscreteSystem& system, int k, double x) {
  if (system.formulation.is_nitsche())
    return basis::basis_eval(basis::BasisKind::LeftDirichlet, k, x);
  return basis::basis_eval(basis::BasisKind::DirichletBoth, k, x);
}

basis::Eval velocity_basis(const SemiDiscreteSystem& system, int k, double x) {
  switch (system.formulation.kind) {
    case FormulationKind::Mixed:
      return basis::basis_eval(basis::BasisKind::PlainLegendre, k - 1, x);
    case FormulationKind::Classical:
      return basis::basis_eval(basis::BasisKind::DirichletBoth, k, x);
    default:
      return basis::basis_eval(basis::BasisKind::LeftDirichlet, k, x);
  }
}

basis::QuadratureRule space_rule(int n_poly) {
  return basis::gauss_legendre(
      std::max(basis::points_for_degree(2 * n_poly + 4), 48));
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

double rel_residual(const Matrix& W, const Vector& a, const Vector& b) {
  Vector r = kernels::matvec(W, a);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  const double bn = kernels::norm2(b);
  return bn > 0.0 ? kernels::norm2(r) / bn : kernels::norm2(r);
}

// Diagonally preconditioned conjugate gradients on the (symmetric positive
// semi-definite) Gramian; returns the best iterate and its relative residual.
Vector pcg(const Matrix& W, const Vector& b, Vector x, double tol,
           int max_iter, double& relres) {
  const int n = W.rows;
  Vector diag(n);
  for (int i = 0; i < n; ++i) {
    const double d = W(i, i);
    diag[i] = d > 0.0 ? 1.0 / d : 1.0;
  }
  const double bn = kernels::norm2(b);
  Vector r = kernels::matvec(W, x);
  for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
  Vector z(n), best = x;
  double best_res = bn > 0.0 ? kernels::norm2(r) / bn : 0.0;
  for (int i = 0; i < n; ++i) z[i] = diag[i] * r[i];
  Vector p = z;
  double rz = kernels::dot(r, z);
  for (int it = 0; it < max_iter; ++it) {
    const double rn = bn > 0.0 ? kernels::norm2(r) / bn : 0.0;
    if (rn < best_res) {
      best_res = rn;
      best = x;
    }
    if (rn <= tol) break;
    const Vector q = kernels::matvec(W, p);
    const double pq = kernels::dot(p, q);
    if (!(pq > 0.0)) break;  // curvature lost: stop at the best iterate
    const double alpha = rz / pq;
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    for (int i = 0; i < n; ++i) z[i] = diag[i] * r[i];
    const double rz_new = kernels::dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  const double rn = bn > 0.0 ? kernels::norm2(r) / bn : 0.0;
  if (rn < best_res) {
    best_res = rn;
    best = x;
  }
  relres = best_res;
  return best;
}

// x <- L^{-T} L^{-1} x for a lower-triangular Cholesky factor L
void chol_apply(const Matrix& L, Vector& x) {
  const int n = L.rows;
  for (int i = 0; i < n; ++i) {
    double s = x[i];
    for (int j = 0; j < i; ++j) s -= L(i, j) * x[j];
    x[i] = s / L(i, i);
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = x[i];
    for (int j = i + 1; j < n; ++j) s -= L(j, i) * x[j];
    x[i] = s / L(i, i);
  }
}

double smallest_pencil_eigenvalue(const Matrix& W,
                                  const SemiDiscreteSystem& system) {
  const observability::PencilRhs rhs = observability::energy_pencil_rhs(system);
  return observability::constants(W, rhs.B).first;
}

double central_difference(const std::function<double(double)>& f, double x) {
  const double h = std::min(1e-6, 0.5 * (1.0 - std::abs(x)) + 1e-9);
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace

double simpson(const Vector& values, double step) {
  const std::size_t n = values.size();
  if (n < 3 || n % 2 == 0)
    throw std::invalid_argument(
        "simpson: need an odd sample count (even interval count)");
  double odd = 0.0, even = 0.0;
  for (std::size_t j = 1; j + 1 < n; j += 2) odd += values[j];
  for (std::size_t j = 2; j + 1 < n; j += 2) even += values[j];
  return step / 3.0 * (values.front() + values.back() + 4.0 * odd + 2.0 * even);
}

Vector rhs_vector(const ControlProblem& problem,
                  const SemiDiscreteSystem& system) {
  const int d = system.dof;
  Vector b(2 * d, 0.0);
  const basis::QuadratureRule rule = space_rule(system.n_poly);
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const double x = rule.nodes[q];
    const double w = rule.weights[q];
    const double y0v = problem.y0(x);
    const double y1v = problem.y1(x);
    for (int k = 1; k <= d; ++k) {
      b[k - 1] += w * y1v * position_basis(system, k, x).value;
      b[d + k - 1] -= w * y0v * velocity_basis(system, k, x).value;
    }
  }
  return b;
}

ControlResult solve_control(const Vector& rhs,
                            const SemiDiscreteSystem& system,
                            const Vector& obs_row, const Matrix& W, double T,
                            int n_t) {
  const int n = 2 * system.dof;
  if (W.rows != n || W.cols != n)
    throw std::invalid_argument("solve_control: Gramian size mismatch");
  if (static_cast<int>(obs_row.size()) != n ||
      static_cast<int>(rhs.size()) != n)
    throw std::invalid_argument("solve_control: vector length mismatch");
  if (!(T > 0.0)) throw std::invalid_argument("solve_control: need T > 0");
  if (n_t <= 0) n_t = 32 * system.n_poly;
  if (n_t % 2 != 0) ++n_t;

  constexpr double kTol = 1e-8;
  ControlResult result;
  Vector a(n, 0.0);
  if (kernels::norm2(rhs) > 0.0) {
    bool direct_ok = true;
    try {
      const Matrix L = kernels::cholesky(W);
      a = rhs;
      chol_apply(L, a);
      // a couple of refinement sweeps recover digits lost to conditioning
      for (int sweep = 0; sweep < 2; ++sweep) {
        if (rel_residual(W, a, rhs) <= kTol) break;
        Vector r = kernels::matvec(W, a);
        for (int i = 0; i < n; ++i) r[i] = rhs[i] - r[i];
        chol_apply(L, r);
        for (int i = 0; i < n; ++i) a[i] += r[i];
      }
      result.residual = rel_residual(W, a, rhs);
    } catch (const kernels::NotSpdError&) {
      direct_ok = false;
      std::fill(a.begin(), a.end(), 0.0);
      result.residual = 1.0;
    }
    if (result.residual > kTol) {
      if (!direct_ok) {
        const double cmin = smallest_pencil_eigenvalue(W, system);
        if (!(cmin > 0.0))
          result.warning = "observability constant " + sci(cmin) +
                           " is not positive; the minimizer may be meaningless";
      }
      result.used_iterative = true;
      double relres = result.residual;
      a = pcg(W, rhs, a, kTol, std::max(200, 40 * n), relres);
      result.residual = relres;
    }
    if (result.residual > kTol) {
      const double cmin = smallest_pencil_eigenvalue(W, system);
      throw NearSingularGramianError(
          "solve_control: Gramian system stalled at relative residual " +
              sci(result.residual) +
              "; smallest observability-pencil eigenvalue " + sci(cmin),
          cmin);
    }
  }

  result.u0_coeffs.assign(a.begin(), a.begin() + system.dof);
  result.u1_coeffs.assign(a.begin() + system.dof, a.end());

  const double h = T / n_t;
  const Matrix step = kernels::expm(system.state_matrix, h);
  result.t_samples.resize(n_t + 1);
  result.v_samples.resize(n_t + 1);
  Vector state = a;
  result.t_samples[0] = 0.0;
  result.v_samples[0] = kernels::dot(obs_row, state);
  for (int j = 1; j <= n_t; ++j) {
    state = kernels::matvec(step, state);
    result.t_samples[j] = j * h;
    result.v_samples[j] = kernels::dot(obs_row, state);
  }
  Vector v2(result.v_samples.size());
  for (std::size_t j = 0; j < v2.size(); ++j)
    v2[j] = result.v_samples[j] * result.v_samples[j];
  result.l2_norm_v = std::sqrt(std::max(0.0, simpson(v2, h)));
  return result;
}

ControlResult solve_control(const ControlProblem& problem,
                            const SemiDiscreteSystem& system,
                            const Vector& obs_row, const Matrix& W, int n_t) {
  if (!(problem.T > 0.0))
    throw std::invalid_argument("solve_control: need T > 0");
  return solve_control(rhs_vector(problem, system), system, obs_row, W,
                       problem.T, n_t);
}

ExactSolution exact_example() {
  ExactSolution exact;
  exact.T = 8.0;
  exact.u0 = [](double) { return 0.0; };
  exact.u0_dx = [](double) { return 0.0; };
  exact.u1 = [](double x) { return -x / 4.0 - 0.25; };
  // piecewise-linear control with a jump at t = 4; the midpoint value is used
  // there so sampled norms see the physically meaningful average
  exact.v = [](double t) {
    if (t < 4.0) return -t / 4.0 + 0.5;
    if (t > 4.0) return -t / 4.0 + 1.5;
    return 0.0;
  };
  return exact;
}

ErrorNorms error_norms(const ControlResult& result,
                       const SemiDiscreteSystem& system,
                       const ExactSolution& exact) {
  const int d = system.dof;
  if (static_cast<int>(result.u0_coeffs.size()) != d ||
      static_cast<int>(result.u1_coeffs.size()) != d)
    throw std::invalid_argument("error_norms: coefficient length mismatch");
  const basis::QuadratureRule rule = space_rule(system.n_poly);
  double e0sq = 0.0, e1sq = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const double x = rule.nodes[q];
    const double w = rule.weights[q];
    double du = 0.0, u1 = 0.0;
    for (int k = 1; k <= d; ++k) {
      du += result.u0_coeffs[k - 1] * position_basis(system, k, x).derivative;
      u1 += result.u1_coeffs[k - 1] * velocity_basis(system, k, x).value;
    }
    const double du_exact =
        exact.u0_dx ? exact.u0_dx(x) : central_difference(exact.u0, x);
    e0sq += w * (du - du_exact) * (du - du_exact);
    const double u1_exact = exact.u1(x);
    e1sq += w * (u1 - u1_exact) * (u1 - u1_exact);
  }

  ErrorNorms errors;
  errors.e_u0 = std::sqrt(std::max(0.0, e0sq));
  errors.e_u1 = std::sqrt(std::max(0.0, e1sq));

  const std::size_t m = result.v_samples.size();
  if (m < 3) throw std::invalid_argument("error_norms: too few time samples");
  Vector diff2(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double delta = result.v_samples[j] - exact.v(result.t_samples[j]);
    diff2[j] = delta * delta;
  }
  const double h = result.t_samples[1] - result.t_samples[0];
  errors.e_v = std::sqrt(std::max(0.0, simpson(diff2, h)));
  return errors;
}

}  // namespace wavobs::hum
