#include "wavobs/observability.hpp"

#include <cmath>
#include <stdexcept>

#include "wavobs/basis.hpp"

namespace wavobs::observability {

using assembly::SemiDiscreteSystem;
using kernels::Matrix;
using kernels::Vector;

SpectrumReport spectrum(const SemiDiscreteSystem& sys) {
  if (sys.formulation.kind != assembly::FormulationKind::Classical)
    throw assembly::UnsupportedFormulationError(
        "spectrum: diagnostics are defined for the classical formulation");
  const int n = sys.dof;
  // The classical pencil is (I, M); solving the reversed pencil (M, I) makes
  // the Cholesky reduction trivial (B = I), which measurably improves the
  // eigenvector accuracy. Eigenvalues map as lambda = 1/mu with the order
  // reversed, and the unit vectors rescale to M-orthonormal ones by 1/sqrt(mu).
  const kernels::PencilEig rev =
      kernels::eig_sym_pencil(sys.energy_velocity, sys.energy_position);

  SpectrumReport rep;
  rep.n_poly = sys.n_poly;
  rep.lambdas.resize(n);
  rep.eigvec_coeffs = kernels::Matrix(n, n);
  for (int k = 0; k < n; ++k) {
    const double mu = rev.values[n - 1 - k];
    if (!(mu > 0.0))
      throw std::runtime_error("spectrum: mass pencil not positive");
    rep.lambdas[k] = 1.0 / mu;
    const double scale = 1.0 / std::sqrt(mu);
    for (int i = 0; i < n; ++i)
      rep.eigvec_coeffs(i, k) = scale * rev.vectors(i, n - 1 - k);
  }
  rep.sqrt_gaps.resize(n);
  rep.deltas.resize(n);
  double prev = 0.0;
  for (int k = 0; k < n; ++k) {
    const double s = std::sqrt(rep.lambdas[k]);
    rep.sqrt_gaps[k] = s - prev;
    prev = s;
    // |phi'(1)|^2 over ∫ |phi'|^2 for the L2-normalized eigenvector
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = rep.eigvec_coeffs(i, k);
    double slope = 0.0;
    for (int i = 0; i < n; ++i) slope += sys.observation_row[i] * v[i];
    const double seminorm =
        kernels::dot(v, kernels::matvec(sys.energy_position, v));
    rep.deltas[k] = slope * slope / seminorm;
  }
  return rep;
}

Matrix gramian_chen(const Matrix& A, const Vector& obs_row, double T) {
  const int n = A.rows;
  if (!A.square() || static_cast<int>(obs_row.size()) != n)
    throw std::invalid_argument("gramian_chen: dimension mismatch");
  if (!(T > 0.0)) throw std::invalid_argument("gramian_chen: T > 0 required");
  // Z = [[-A^T, obs^T obs], [0, A]]
  Matrix Z(2 * n, 2 * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Z(i, j) = -A(j, i);
      Z(i, n + j) = obs_row[i] * obs_row[j];
      Z(n + i, n + j) = A(i, j);
    }
  const Matrix F = kernels::expm(Z, T);
  // W = F22^T F12
  Matrix W(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += F(n + k, n + i) * F(k, n + j);
      W(i, j) = s;
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) {
      const double v = 0.5 * (W(i, j) + W(j, i));
      W(i, j) = W(j, i) = v;
    }
  return W;
}

Matrix gramian_chen(const SemiDiscreteSystem& sys, double T,
                    const Vector& obs_row) {
  return gramian_chen(sys.state_matrix, obs_row, T);
}

Matrix gramian_quadrature(const Matrix& A, const Vector& obs_row, double T,
                          int n_t, double max_panel) {
  const int n = A.rows;
  if (!A.square() || static_cast<int>(obs_row.size()) != n)
    throw std::invalid_argument("gramian_quadrature: dimension mismatch");
  if (n_t < 64) throw std::invalid_argument("gramian_quadrature: n_t >= 64");
  if (!(T > 0.0) || !(max_panel > 0.0))
    throw std::invalid_argument("gramian_quadrature: bad T/panel");

  // panels of ~24 Gauss nodes each; enough panels to honor both the length
  // cap and the requested node total
  const int q = 24;
  const int m = std::max(static_cast<int>(std::ceil(T / max_panel)),
                         static_cast<int>(std::ceil(double(n_t) / q)));
  const double h = T / m;

  const basis::QuadratureRule rule = basis::gauss_legendre(q);
  // row at a panel-local node: obs e^{A(ph + tau_i)} = (obs e^{A tau_i}) ...
  // evaluated incrementally: r_p = r_{p-1} e^{Ah}, node row = r_p e^{A tau_i}
  std::vector<Matrix> offset(q);
  for (int i = 0; i < q; ++i) {
    const double tau = (rule.nodes[i] + 1.0) * h / 2.0;
    offset[i] = kernels::expm(A, tau);
  }
  const Matrix step = kernels::expm(A, h);

  Matrix W(n, n);
  Vector base = obs_row;  // obs e^{A p h}
  for (int p = 0; p < m; ++p) {
    for (int i = 0; i < q; ++i) {
      const Vector u = kernels::vecmat(base, offset[i]);
      const double w = rule.weights[i] * h / 2.0;
      for (int a = 0; a < n; ++a) {
        const double ua = w * u[a];
        if (ua == 0.0) continue;
        double* row = W.row(a);
        for (int b = 0; b < n; ++b) row[b] += ua * u[b];
      }
    }
    base = kernels::vecmat(base, step);
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) {
      const double v = 0.5 * (W(i, j) + W(j, i));
      W(i, j) = W(j, i) = v;
    }
  return W;
}

Matrix gramian_quadrature(const SemiDiscreteSystem& sys, double T,
                          const Vector& obs_row, int n_t) {
  return gramian_quadrature(sys.state_matrix, obs_row, T, n_t);
}

PencilRhs energy_pencil_rhs(const SemiDiscreteSystem& sys) {
  const int n = sys.dof;
  PencilRhs rhs;
  rhs.B = Matrix(2 * n, 2 * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      rhs.B(i, j) = 0.5 * sys.energy_position(i, j);
      rhs.B(n + i, n + j) = 0.5 * sys.energy_velocity(i, j);
    }
  if (sys.formulation.kind == assembly::FormulationKind::NitscheNonSymmetric) {
    double tr = 0.0;
    for (int i = 0; i < 2 * n; ++i) tr += rhs.B(i, i);
    rhs.ridge_shift = 1e-12 * tr / (2 * n);
    for (int i = 0; i < 2 * n; ++i) rhs.B(i, i) += rhs.ridge_shift;
  }
  return rhs;
}

std::pair<double, double> constants(const Matrix& W, const Matrix& B) {
  const kernels::PencilEig eig = kernels::eig_sym_pencil(W, B);
  return {eig.values.front(), eig.values.back()};
}

GramianResult observe(const SemiDiscreteSystem& sys, double T) {
  return observe(sys, T, sys.observation_row, "");
}

GramianResult observe(const SemiDiscreteSystem& sys, double T,
                      const Vector& obs_row, const std::string& filter_tag) {
  GramianResult res;
  res.T = T;
  res.filter_tag = filter_tag;
  res.W = gramian_chen(sys.state_matrix, obs_row, T);
  const PencilRhs rhs = energy_pencil_rhs(sys);
  res.ridge_shift = rhs.ridge_shift;
  std::tie(res.c_NT, res.C_NT) = constants(res.W, rhs.B);
  return res;
}

SemiDiscreteSystem truncated_observation(const SemiDiscreteSystem& sys,
                                         const SpectrumReport& report,
                                         int M) {
  if (sys.formulation.kind != assembly::FormulationKind::Classical)
    throw assembly::UnsupportedFormulationError(
        "truncated_observation: defined for the classical formulation");
  const int n = sys.dof;
  if (M < 1 || M > n)
    throw std::out_of_range("truncated_observation: M out of range");

  SemiDiscreteSystem mod;
  mod.formulation = sys.formulation;
  mod.n_poly = sys.n_poly;
  mod.dof = M;
  mod.state_matrix = Matrix(2 * M, 2 * M);
  mod.energy_position = Matrix(M, M);
  mod.energy_velocity = Matrix::identity(M);
  mod.observation_row.assign(2 * M, 0.0);
  for (int k = 0; k < M; ++k) {
    mod.state_matrix(k, M + k) = 1.0;
    mod.state_matrix(M + k, k) = -report.lambdas[k];
    mod.energy_position(k, k) = report.lambdas[k];
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      s += report.eigvec_coeffs(i, k) * sys.observation_row[i];
    mod.observation_row[k] = s;
  }
  return mod;
}

}  // namespace wavobs::observability
