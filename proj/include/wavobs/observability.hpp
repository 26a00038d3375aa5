#pragma once
// Spectrum diagnostics, the observability Gramian W = ∫_0^T (row e^{At})^T
// (row e^{At}) dt computed two independent ways, modal truncation, and the
// observability/direct constants c_NT / C_NT extracted from the pencil of W
// against the energy form.

#include <string>

#include "wavobs/assembly.hpp"
#include "wavobs/kernels.hpp"

namespace wavobs::observability {

struct SpectrumReport {
  int n_poly = 0;
  kernels::Vector lambdas;    // ascending, positive
  kernels::Vector sqrt_gaps;  // sqrt(lambda_k) - sqrt(lambda_{k-1}); the first
                              // entry is sqrt(lambda_1) itself
  kernels::Vector deltas;     // per-mode boundary density |phi'(1)|^2 / ∫|phi'|^2
  kernels::Matrix eigvec_coeffs;  // columns, normalized so V^T Me V = I
};

struct GramianResult {
  kernels::Matrix W;
  double c_NT = 0.0;
  double C_NT = 0.0;
  double T = 0.0;
  std::string filter_tag;    // description of any filter/truncation applied
  double ridge_shift = 0.0;  // diagonal regularization added to the pencil RHS
};

// Eigen-decomposition of the (Ke, Me) pencil of the classical system plus the
// gap and boundary-density diagnostics. Throws UnsupportedFormulationError
// for the other formulations.
SpectrumReport spectrum(const assembly::SemiDiscreteSystem& sys);

// One-exponential Gramian: exponentiate [[-A^T, obs^T obs],[0, A]] at time T
// and return F22^T F12, symmetrized.
kernels::Matrix gramian_chen(const kernels::Matrix& A,
                             const kernels::Vector& obs_row, double T);
kernels::Matrix gramian_chen(const assembly::SemiDiscreteSystem& sys, double T,
                             const kernels::Vector& obs_row);

// Independent route: composite Gauss-Legendre in time, panels of length at
// most 1/8 (n_t is a floor on the total node count; at least 64 required).
kernels::Matrix gramian_quadrature(const kernels::Matrix& A,
                                   const kernels::Vector& obs_row, double T,
                                   int n_t, double max_panel = 0.125);
kernels::Matrix gramian_quadrature(const assembly::SemiDiscreteSystem& sys,
                                   double T, const kernels::Vector& obs_row,
                                   int n_t);

struct PencilRhs {
  kernels::Matrix B;         // (1/2) blockdiag(Ke, Me), possibly ridged
  double ridge_shift = 0.0;  // sigma of the +sigma*I applied (0 when none)
};

// Right-hand side of the constants pencil. The non-symmetric Nitsche position
// energy is numerically near-singular, so it gets a relative ridge of 1e-12
// on the diagonal; the shift is reported, never silent.
PencilRhs energy_pencil_rhs(const assembly::SemiDiscreteSystem& sys);

// (c_NT, C_NT) = extreme eigenvalues of W x = lambda B x.
std::pair<double, double> constants(const kernels::Matrix& W,
                                    const kernels::Matrix& B);

// Full pipeline: Chen Gramian of the given observation row (defaults to the
// system's own) against the system's energy pencil.
GramianResult observe(const assembly::SemiDiscreteSystem& sys, double T);
GramianResult observe(const assembly::SemiDiscreteSystem& sys, double T,
                      const kernels::Vector& obs_row,
                      const std::string& filter_tag);

// Restriction of the classical system to its first M eigenmodes: state matrix
// [[0, I], [-diag(lambda), 0]], energy pencil (diag(lambda), I), observation
// row obs composed with the modal projector. Constants of the returned system
// are the truncated-expansion constants. Requires 1 <= M <= N-1.
assembly::SemiDiscreteSystem truncated_observation(
    const assembly::SemiDiscreteSystem& sys, const SpectrumReport& report,
    int M);

}  // namespace wavobs::observability
