#include "wavobs/basis.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "wavobs/kernels.hpp"

namespace wavobs::basis {

Eval legendre_eval(int k, double x) {
  if (k < 0) throw std::out_of_range("legendre_eval: negative index");
  if (std::fabs(x) > 1.0 + 1e-12)
    throw std::domain_error("legendre_eval: |x| > 1");
  // L_{j+1} = ((2j+1) x L_j - j L_{j-1})/(j+1),  L'_{j+1} = L'_{j-1} + (2j+1) L_j
  double pm = 1.0, p = x;    // L_0, L_1
  double dm = 0.0, d = 1.0;  // L_0', L_1'
  if (k == 0) return {1.0, 0.0};
  for (int j = 1; j < k; ++j) {
    const double pn = ((2.0 * j + 1.0) * x * p - j * pm) / (j + 1.0);
    const double dn = dm + (2.0 * j + 1.0) * p;
    pm = p;
    p = pn;
    dm = d;
    d = dn;
  }
  return {p, d};
}

Eval basis_eval(BasisKind kind, int k, double x) {
  switch (kind) {
    case BasisKind::PlainLegendre:
      return legendre_eval(k, x);
    case BasisKind::DirichletBoth: {
      if (k < 1) throw std::out_of_range("basis_eval: DirichletBoth needs k >= 1");
      const Eval lo = legendre_eval(k - 1, x);
      const Eval hi = legendre_eval(k + 1, x);
      const double c = 1.0 / std::sqrt(4.0 * k + 2.0);
      return {c * (lo.value - hi.value), c * (lo.derivative - hi.derivative)};
    }
    case BasisKind::LeftDirichlet: {
      if (k < 1) throw std::out_of_range("basis_eval: LeftDirichlet needs k >= 1");
      const Eval l = legendre_eval(k, x);
      const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
      return {l.value - sgn, l.derivative};
    }
  }
  throw std::invalid_argument("basis_eval: unknown basis kind");
}

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n >= 1 required");
  QuadratureRule rule;
  rule.order = n;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const double pi = std::acos(-1.0);
  // solve for the roots in the upper half; mirror for exact symmetry
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dv = 1.0;
    bool done = false;
    for (int it = 0; it < 100; ++it) {
      const Eval e = legendre_eval(n, x);
      dv = e.derivative;
      const double step = e.value / dv;
      x -= step;
      if (std::fabs(step) <= 1e-14) {
        done = true;
        break;
      }
    }
    if (!done)
      throw std::runtime_error("gauss_legendre: Newton failed to converge at n=" +
                               std::to_string(n));
    dv = legendre_eval(n, x).derivative;
    const double w = 2.0 / ((1.0 - x * x) * dv * dv);
    const int hi = n - 1 - i;  // root i counts down from x = +1
    rule.nodes[hi] = x;
    rule.weights[hi] = w;
    rule.nodes[i] = -x;
    rule.weights[i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

namespace {

// closed-form Gram matrices of the three families
kernels::Matrix gram_matrix(BasisKind kind, int n) {
  kernels::Matrix G(n, n);
  switch (kind) {
    case BasisKind::PlainLegendre:
      for (int k = 0; k < n; ++k) G(k, k) = 2.0 / (2.0 * k + 1.0);
      break;
    case BasisKind::DirichletBoth:
      // pentadiagonal: same mass matrix as the Dirichlet discretization
      for (int r = 1; r <= n; ++r) {
        G(r - 1, r - 1) = 2.0 / ((2.0 * r - 1.0) * (2.0 * r + 3.0));
        if (r + 2 <= n) {
          const double v = -1.0 / ((2.0 * r + 3.0) *
                                   std::sqrt((2.0 * r + 1.0) * (2.0 * r + 5.0)));
          G(r - 1, r + 1) = v;
          G(r + 1, r - 1) = v;
        }
      }
      break;
    case BasisKind::LeftDirichlet:
      // ∫(L_i - (-1)^i)(L_j - (-1)^j) = 2/(2i+1) δ_ij + 2 (-1)^{i+j}, i,j >= 1
      for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) {
          double v = 2.0 * (((i + j) % 2 == 0) ? 1.0 : -1.0);
          if (i == j) v += 2.0 / (2.0 * i + 1.0);
          G(i - 1, j - 1) = v;
        }
      break;
  }
  return G;
}

}  // namespace

std::vector<double> project(const std::function<double(double)>& f,
                            BasisKind kind, int n_modes,
                            const QuadratureRule& rule) {
  if (n_modes < 1) throw std::invalid_argument("project: n_modes >= 1 required");
  const int k0 = (kind == BasisKind::PlainLegendre) ? 0 : 1;
  std::vector<double> m(n_modes, 0.0);
  for (int q = 0; q < rule.order; ++q) {
    const double x = rule.nodes[q];
    const double wf = rule.weights[q] * f(x);
    for (int j = 0; j < n_modes; ++j)
      m[j] += wf * basis_eval(kind, k0 + j, x).value;
  }
  const kernels::Matrix G = gram_matrix(kind, n_modes);
  return kernels::solve(G, m, /*spd_hint=*/true);
}

}  // namespace wavobs::basis
