#pragma once
// Dense linear algebra: matrix exponential (scaling-and-squaring, Pade 13),
// generalized symmetric-definite eigensolver, SPD and general solves.
// Everything operates on row-major dense storage; dimensions stay small
// (state sizes up to ~1000), so O(n^3) dense algorithms are used throughout.

#include <stdexcept>
#include <vector>

namespace wavobs::kernels {

using Vector = std::vector<double>;

struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {
    if (r < 0 || c < 0) throw std::invalid_argument("Matrix: negative size");
  }

  double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
  double* row(int i) { return a.data() + static_cast<size_t>(i) * cols; }
  const double* row(int i) const { return a.data() + static_cast<size_t>(i) * cols; }
  bool square() const { return rows == cols; }

  static Matrix identity(int n);
};

struct NotSpdError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SingularError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// C = A*B, C += A*B
Matrix matmul(const Matrix& A, const Matrix& B);
void matmul_acc(const Matrix& A, const Matrix& B, Matrix& C);
Vector matvec(const Matrix& A, const Vector& x);
// y = x^T A (row times matrix)
Vector vecmat(const Vector& x, const Matrix& A);
Matrix transpose(const Matrix& A);

double norm1(const Matrix& A);       // max absolute column sum
double frobenius(const Matrix& A);
double dot(const Vector& x, const Vector& y);
double norm2(const Vector& x);

// e^{A t}. Scaling-and-squaring with the degree-13 Pade approximant; the
// scaling power is chosen from the 1-norm backward-error bound. Throws
// SingularError if the Pade denominator cannot be solved and
// std::overflow_error if ||At|| is too large to scale.
Matrix expm(const Matrix& A, double t);

// lower-triangular L with A = L L^T; throws NotSpdError
Matrix cholesky(const Matrix& A);

// A x = b. spd_hint selects Cholesky, otherwise partially pivoted LU.
// Throws SingularError (with a condition estimate in the message) when a
// pivot collapses.
Vector solve(const Matrix& A, const Vector& b, bool spd_hint = false);
// A X = B for matrix right-hand sides (B is consumed).
Matrix solve_matrix(const Matrix& A, Matrix B, bool spd_hint = false);

struct PencilEig {
  Vector values;   // ascending
  Matrix vectors;  // columns, B-orthonormal: V^T B V = I
};

// A x = lambda B x with A symmetric and B SPD, via the Cholesky reduction
// L^{-1} A L^{-T}, Householder tridiagonalization and implicit-shift QL.
PencilEig eig_sym_pencil(const Matrix& A, const Matrix& B);

}  // namespace wavobs::kernels
