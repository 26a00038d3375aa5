#pragma once
// Legendre polynomials, the boundary-adapted bases built from them, Gauss
// quadrature on (-1,1), and L2 projection onto the bases.

#include <functional>
#include <vector>

namespace wavobs::basis {

// - PlainLegendre:   L_k,               k >= 0
// - DirichletBoth:   (L_{k-1} - L_{k+1}) / sqrt(4k+2),  k >= 1, zero at both
//                    endpoints, derivatives H1-orthonormal
// - LeftDirichlet:   L_k - (-1)^k,      k >= 1, zero at x = -1
enum class BasisKind { DirichletBoth, LeftDirichlet, PlainLegendre };

struct QuadratureRule {
  std::vector<double> nodes;    // strictly increasing, symmetric about 0
  std::vector<double> weights;  // positive, sum = 2
  int order = 0;                // number of points
};

struct Eval {
  double value = 0.0;
  double derivative = 0.0;
};

// (L_k(x), L_k'(x)) by the upward three-term recurrence.
// Throws std::domain_error when |x| > 1 + 1e-12.
Eval legendre_eval(int k, double x);

// Evaluate a basis function and its derivative. Throws std::out_of_range for
// an index outside the family range.
Eval basis_eval(BasisKind kind, int k, double x);

// n-point Gauss-Legendre rule. Nodes by Newton iteration on L_n started from
// the Chebyshev-angle guesses; weights w = 2 / ((1-x^2) L_n'(x)^2). Nodes are
// mirrored so the rule is exactly symmetric.
QuadratureRule gauss_legendre(int n);

// Number of Gauss points that integrate polynomials of degree d exactly.
constexpr int points_for_degree(int d) { return (d + 3) / 2; }

// L2 projection of f onto the first n_modes functions of the family: solves
// the Gram system G c = m with m_k = ∫ f φ_k evaluated by `rule`. The Gram
// matrix is assembled from closed forms, so only the moments depend on the
// rule's accuracy. Index ranges follow the family (PlainLegendre k = 0.., the
// others k = 1..); the returned vector is ordered by ascending index.
std::vector<double> project(const std::function<double(double)>& f,
                            BasisKind kind, int n_modes,
                            const QuadratureRule& rule);

}  // namespace wavobs::basis
