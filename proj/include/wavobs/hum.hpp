#pragma once
// Discrete Hilbert-uniqueness-method control: pair the target initial data
// against the trial bases to form the duality right-hand side, solve the
// Gramian system for the minimizing adjoint initial state, synthesize the
// boundary control v(t) = obs_row . exp(A t) a, and measure errors against a
// closed-form reference solution.

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavobs/assembly.hpp"
#include "wavobs/kernels.hpp"

namespace wavobs::hum {

// Target-system initial data (y0, y1) and the control horizon T.
struct ControlProblem {
  std::function<double(double)> y0;
  std::function<double(double)> y1;
  double T = 8.0;
};

// Output of the Gramian-based control solve: adjoint initial data split into
// position/velocity coefficient blocks, the synthesized boundary control on a
// uniform time grid, its L2(0,T) norm, and solver diagnostics.
struct ControlResult {
  kernels::Vector u0_coeffs;
  kernels::Vector u1_coeffs;
  kernels::Vector t_samples;
  kernels::Vector v_samples;
  double l2_norm_v = 0.0;
  double residual = 0.0;        // relative residual of the Gramian system
  bool used_iterative = false;  // direct factorization failed or was polished
                                // by preconditioned conjugate gradients
  std::string warning;          // non-empty when the smallest pencil eigenvalue
                                // is non-positive (minimizer may be meaningless)
};

// Closed-form reference solution: adjoint data (u0, u1) and control v on
// [0, T]. u0_dx is optional; when absent, derivative-based error norms fall
// back to central finite differences of u0.
struct ExactSolution {
  std::function<double(double)> u0;
  std::function<double(double)> u1;
  std::function<double(double)> v;
  double T = 8.0;
  std::function<double(double)> u0_dx;
};

struct ErrorNorms {
  double e_u0 = 0.0;  // H1-seminorm error of the position data
  double e_u1 = 0.0;  // L2 error of the velocity data
  double e_v = 0.0;   // L2(0,T) error of the control
};

// Raised when the Gramian system cannot be solved to the required residual;
// carries the smallest eigenvalue of the observability pencil, which diagnoses
// the loss of observability.
class NearSingularGramianError : public std::runtime_error {
 public:
  NearSingularGramianError(const std::string& what, double smallest)
      : std::runtime_error(what), smallest_eigenvalue(smallest) {}
  double smallest_eigenvalue;
};

// Duality right-hand side: position-block entries pair y1 against the
// formulation's position trial basis, velocity-block entries pair -y0 against
// its velocity trial basis.
kernels::Vector rhs_vector(const ControlProblem& problem,
                           const assembly::SemiDiscreteSystem& system);

// Core solve: W a = rhs for the stacked adjoint initial state, then control
// synthesis v(t_j) = obs_row . exp(A t_j) a on n_t uniform steps over [0, T]
// (n_t <= 0 selects the default 32 N, rounded up to an even count so composite
// Simpson applies). Direct Cholesky with iterative refinement; falls back to
// diagonally preconditioned conjugate gradients, and throws
// NearSingularGramianError if the relative residual cannot reach 1e-8.
ControlResult solve_control(const kernels::Vector& rhs,
                            const assembly::SemiDiscreteSystem& system,
                            const kernels::Vector& obs_row,
                            const kernels::Matrix& W, double T, int n_t = 0);

// Convenience overload that builds the right-hand side from the problem data.
ControlResult solve_control(const ControlProblem& problem,
                            const assembly::SemiDiscreteSystem& system,
                            const kernels::Vector& obs_row,
                            const kernels::Matrix& W, int n_t = 0);

// The worked example with target data y0 = x + 1, y1 = 0 on horizon T = 8:
// adjoint data u0 = 0, u1 = -x/4 - 1/4 and piecewise-linear control
// v(t) = -t/4 + 1/2 on (0,4), v(t) = -t/4 + 3/2 on (4,8).
ExactSolution exact_example();

// Errors of the computed control against a closed-form reference: H1-seminorm
// and L2 errors of the reconstructed adjoint data by Gauss quadrature, control
// error by composite Simpson on the sample grid.
ErrorNorms error_norms(const ControlResult& result,
                       const assembly::SemiDiscreteSystem& system,
                       const ExactSolution& exact);

// Composite Simpson integral of uniformly spaced samples (even interval count
// required).
double simpson(const kernels::Vector& values, double step);

}  // namespace wavobs::hum
