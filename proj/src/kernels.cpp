#include "wavobs/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

namespace wavobs::kernels {

Matrix Matrix::identity(int n) {
  Matrix I(n, n);
  for (int i = 0; i < n; ++i) I(i, i) = 1.0;
  return I;
}

namespace {

void check_mul(const Matrix& A, const Matrix& B) {
  if (A.cols != B.rows) throw std::invalid_argument("matmul: inner dimensions differ");
}

// C += A*B over the k-slab [k0,k1); ikj order so the j loop vectorizes.
void gemm_slab(const Matrix& A, const Matrix& B, Matrix& C, int k0, int k1) {
  const int n = B.cols;
  for (int i = 0; i < A.rows; ++i) {
    double* __restrict ci = C.row(i);
    for (int k = k0; k < k1; ++k) {
      const double aik = A(i, k);
      if (aik == 0.0) continue;
      const double* __restrict bk = B.row(k);
      for (int j = 0; j < n; ++j) ci[j] += aik * bk[j];
    }
  }
}

}  // namespace

void matmul_acc(const Matrix& A, const Matrix& B, Matrix& C) {
  check_mul(A, B);
  if (C.rows != A.rows || C.cols != B.cols)
    throw std::invalid_argument("matmul_acc: output shape mismatch");
  constexpr int kb = 256;  // slab size keeps the active rows of B in cache
  for (int k0 = 0; k0 < A.cols; k0 += kb)
    gemm_slab(A, B, C, k0, std::min(A.cols, k0 + kb));
}

Matrix matmul(const Matrix& A, const Matrix& B) {
  check_mul(A, B);
  Matrix C(A.rows, B.cols);
  matmul_acc(A, B, C);
  return C;
}

Vector matvec(const Matrix& A, const Vector& x) {
  if (static_cast<int>(x.size()) != A.cols)
    throw std::invalid_argument("matvec: dimension mismatch");
  Vector y(A.rows, 0.0);
  for (int i = 0; i < A.rows; ++i) {
    const double* __restrict ai = A.row(i);
    double s = 0.0;
    for (int j = 0; j < A.cols; ++j) s += ai[j] * x[j];
    y[i] = s;
  }
  return y;
}

Vector vecmat(const Vector& x, const Matrix& A) {
  if (static_cast<int>(x.size()) != A.rows)
    throw std::invalid_argument("vecmat: dimension mismatch");
  Vector y(A.cols, 0.0);
  for (int i = 0; i < A.rows; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* __restrict ai = A.row(i);
    for (int j = 0; j < A.cols; ++j) y[j] += xi * ai[j];
  }
  return y;
}

Matrix transpose(const Matrix& A) {
  Matrix T(A.cols, A.rows);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) T(j, i) = A(i, j);
  return T;
}

double norm1(const Matrix& A) {
  Vector colsum(A.cols, 0.0);
  for (int i = 0; i < A.rows; ++i) {
    const double* ai = A.row(i);
    for (int j = 0; j < A.cols; ++j) colsum[j] += std::fabs(ai[j]);
  }
  return colsum.empty() ? 0.0 : *std::max_element(colsum.begin(), colsum.end());
}

double frobenius(const Matrix& A) {
  double s = 0.0;
  for (double v : A.a) s += v * v;
  return std::sqrt(s);
}

double dot(const Vector& x, const Vector& y) {
  return std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
}

double norm2(const Vector& x) { return std::sqrt(dot(x, x)); }

// ---------------------------------------------------------------- factorizations

Matrix cholesky(const Matrix& A) {
  if (!A.square()) throw std::invalid_argument("cholesky: matrix not square");
  const int n = A.rows;
  Matrix L(n, n);
  for (int j = 0; j < n; ++j) {
    double d = A(j, j);
    for (int k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
    if (!(d > 0.0) || !std::isfinite(d))
      throw NotSpdError("cholesky: matrix is not positive definite (pivot " +
                        std::to_string(j) + ")");
    const double ljj = std::sqrt(d);
    L(j, j) = ljj;
    for (int i = j + 1; i < n; ++i) {
      double s = A(i, j);
      const double* li = L.row(i);
      const double* lj = L.row(j);
      for (int k = 0; k < j; ++k) s -= li[k] * lj[k];
      L(i, j) = s / ljj;
    }
  }
  return L;
}

namespace {

struct LuFactors {
  Matrix lu;
  std::vector<int> perm;
};

LuFactors lu_factor(const Matrix& A) {
  if (!A.square()) throw std::invalid_argument("lu: matrix not square");
  const int n = A.rows;
  LuFactors f{A, std::vector<int>(n)};
  Matrix& lu = f.lu;
  std::iota(f.perm.begin(), f.perm.end(), 0);
  double maxpivot = 0.0, minpivot = 0.0;
  for (int k = 0; k < n; ++k) {
    int p = k;
    for (int i = k + 1; i < n; ++i)
      if (std::fabs(lu(i, k)) > std::fabs(lu(p, k))) p = i;
    if (p != k) {
      for (int j = 0; j < n; ++j) std::swap(lu(k, j), lu(p, j));
      std::swap(f.perm[k], f.perm[p]);
    }
    const double piv = lu(k, k);
    const double apiv = std::fabs(piv);
    maxpivot = std::max(maxpivot, apiv);
    minpivot = (k == 0) ? apiv : std::min(minpivot, apiv);
    if (apiv <= 1e-300 * std::max(1.0, maxpivot))
      throw SingularError("lu: singular to working precision (pivot " +
                          std::to_string(k) + ", condition estimate " +
                          std::to_string(maxpivot / std::max(apiv, 1e-300)) + ")");
    const double inv = 1.0 / piv;
    for (int i = k + 1; i < n; ++i) {
      const double lik = lu(i, k) * inv;
      lu(i, k) = lik;
      if (lik == 0.0) continue;
      const double* rk = lu.row(k);
      double* ri = lu.row(i);
      for (int j = k + 1; j < n; ++j) ri[j] -= lik * rk[j];
    }
  }
  return f;
}

// solves in place on the columns of B
void lu_solve_inplace(const LuFactors& f, Matrix& B) {
  const int n = f.lu.rows;
  Matrix P(n, B.cols);
  for (int i = 0; i < n; ++i)
    std::memcpy(P.row(i), B.row(f.perm[i]), sizeof(double) * B.cols);
  B = std::move(P);
  for (int k = 0; k < n; ++k) {  // L y = P b (unit lower)
    const double* rk = B.row(k);
    for (int i = k + 1; i < n; ++i) {
      const double lik = f.lu(i, k);
      if (lik == 0.0) continue;
      double* ri = B.row(i);
      for (int j = 0; j < B.cols; ++j) ri[j] -= lik * rk[j];
    }
  }
  for (int k = n - 1; k >= 0; --k) {  // U x = y
    double* rk = B.row(k);
    const double inv = 1.0 / f.lu(k, k);
    for (int j = 0; j < B.cols; ++j) rk[j] *= inv;
    for (int i = 0; i < k; ++i) {
      const double uik = f.lu(i, k);
      if (uik == 0.0) continue;
      double* ri = B.row(i);
      for (int j = 0; j < B.cols; ++j) ri[j] -= uik * rk[j];
    }
  }
}

void chol_solve_inplace(const Matrix& L, Matrix& B) {
  const int n = L.rows;
  for (int k = 0; k < n; ++k) {  // L y = b
    double* rk = B.row(k);
    const double inv = 1.0 / L(k, k);
    for (int j = 0; j < B.cols; ++j) rk[j] *= inv;
    for (int i = k + 1; i < n; ++i) {
      const double lik = L(i, k);
      if (lik == 0.0) continue;
      double* ri = B.row(i);
      for (int j = 0; j < B.cols; ++j) ri[j] -= lik * rk[j];
    }
  }
  for (int k = n - 1; k >= 0; --k) {  // L^T x = y
    double* rk = B.row(k);
    const double inv = 1.0 / L(k, k);
    for (int j = 0; j < B.cols; ++j) rk[j] *= inv;
    for (int i = 0; i < k; ++i) {
      const double lki = L(k, i);
      if (lki == 0.0) continue;
      double* ri = B.row(i);
      for (int j = 0; j < B.cols; ++j) ri[j] -= lki * rk[j];
    }
  }
}

}  // namespace

Matrix solve_matrix(const Matrix& A, Matrix B, bool spd_hint) {
  if (A.rows != B.rows) throw std::invalid_argument("solve: dimension mismatch");
  if (spd_hint) {
    const Matrix L = cholesky(A);
    chol_solve_inplace(L, B);
  } else {
    const LuFactors f = lu_factor(A);
    lu_solve_inplace(f, B);
  }
  return B;
}

Vector solve(const Matrix& A, const Vector& b, bool spd_hint) {
  Matrix B(static_cast<int>(b.size()), 1);
  for (size_t i = 0; i < b.size(); ++i) B(static_cast<int>(i), 0) = b[i];
  B = solve_matrix(A, std::move(B), spd_hint);
  Vector x(b.size());
  for (size_t i = 0; i < b.size(); ++i) x[i] = B(static_cast<int>(i), 0);
  return x;
}

// ---------------------------------------------------------------- expm

Matrix expm(const Matrix& A, double t) {
  if (!A.square()) throw std::invalid_argument("expm: matrix not square");
  const int n = A.rows;
  Matrix B = A;
  for (double& v : B.a) v *= t;

  double nrm = norm1(B);
  if (!std::isfinite(nrm)) throw std::invalid_argument("expm: non-finite input");
  constexpr double theta13 = 5.371920351148152;

  // pre-scale monstrous inputs so the matrix powers below stay finite
  int s = 0;
  if (nrm > 1e40) {
    s = static_cast<int>(std::ceil(std::log2(nrm / 1e10)));
    if (s > 200)
      throw std::overflow_error("expm: ||At|| = " + std::to_string(nrm) +
                                " too large to scale");
    const double f = std::ldexp(1.0, -s);
    for (double& v : B.a) v *= f;
    nrm = norm1(B);
  }

  static const double b[14] = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
      1187353796428800.0,  129060195264000.0,   10559470521600.0,
      670442572800.0,      33522128640.0,       1323241920.0,
      40840800.0,          960960.0,            16380.0,
      182.0,               1.0};

  const Matrix I = Matrix::identity(n);
  Matrix A2 = matmul(B, B);
  Matrix A4 = matmul(A2, A2);
  Matrix A6 = matmul(A2, A4);

  // Scaling from the norms of matrix powers rather than ||B|| alone: for the
  // highly non-normal block matrices this code sees, ||B^k||^{1/k} can sit
  // orders of magnitude below ||B||, and every avoided squaring doubles the
  // attainable accuracy.
  if (nrm > theta13) {
    const double d6 = std::pow(norm1(A6), 1.0 / 6.0);
    const double d8 = std::pow(norm1(matmul(A4, A4)), 1.0 / 8.0);
    const double d10 = std::pow(norm1(matmul(A4, A6)), 1.0 / 10.0);
    const double eta =
        std::min({nrm, std::max(d6, d8), std::max(d8, d10)});
    int extra = 0;
    if (eta > theta13)
      extra = static_cast<int>(std::ceil(std::log2(eta / theta13)));
    s += extra;
    if (s > 200)
      throw std::overflow_error("expm: ||At|| = " + std::to_string(nrm) +
                                " too large to scale");
    if (extra > 0) {
      const double f1 = std::ldexp(1.0, -extra);
      const double f2 = std::ldexp(1.0, -2 * extra);
      const double f4 = std::ldexp(1.0, -4 * extra);
      const double f6 = std::ldexp(1.0, -6 * extra);
      for (double& v : B.a) v *= f1;
      for (double& v : A2.a) v *= f2;
      for (double& v : A4.a) v *= f4;
      for (double& v : A6.a) v *= f6;
    }
  }

  auto combo = [&](double c6, double c4, double c2, double c0) {
    Matrix M(n, n);
    for (size_t i = 0; i < M.a.size(); ++i)
      M.a[i] = c6 * A6.a[i] + c4 * A4.a[i] + c2 * A2.a[i];
    for (int i = 0; i < n; ++i) M(i, i) += c0;
    return M;
  };

  Matrix W = combo(b[13], b[11], b[9], 0.0);
  Matrix U = matmul(A6, W);
  {
    const Matrix low = combo(b[7], b[5], b[3], b[1]);
    for (size_t i = 0; i < U.a.size(); ++i) U.a[i] += low.a[i];
  }
  U = matmul(B, U);

  Matrix V = combo(b[12], b[10], b[8], 0.0);
  V = matmul(A6, V);
  {
    const Matrix low = combo(b[6], b[4], b[2], b[0]);
    for (size_t i = 0; i < V.a.size(); ++i) V.a[i] += low.a[i];
  }

  Matrix P(n, n), Q(n, n);  // P = V+U, Q = V-U
  for (size_t i = 0; i < P.a.size(); ++i) {
    P.a[i] = V.a[i] + U.a[i];
    Q.a[i] = V.a[i] - U.a[i];
  }
  Matrix X = solve_matrix(Q, std::move(P), false);
  for (int k = 0; k < s; ++k) X = matmul(X, X);
  return X;
}

// ------------------------------------------------- symmetric pencil eigensolver

namespace {

// Householder reduction of a symmetric matrix to tridiagonal form with
// accumulation of the orthogonal transform in z (tred2 lineage).
void tridiagonalize(Matrix& z, Vector& d, Vector& e) {
  const int n = z.rows;
  for (int i = n - 1; i > 0; --i) {
    const int l = i - 1;
    double h = 0.0, scale = 0.0;
    if (l > 0) {
      for (int k = 0; k <= l; ++k) scale += std::fabs(z(i, k));
      if (scale == 0.0) {
        e[i] = z(i, l);
      } else {
        for (int k = 0; k <= l; ++k) {
          z(i, k) /= scale;
          h += z(i, k) * z(i, k);
        }
        double f = z(i, l);
        double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        z(i, l) = f - g;
        f = 0.0;
        for (int j = 0; j <= l; ++j) {
          z(j, i) = z(i, j) / h;
          g = 0.0;
          for (int k = 0; k <= j; ++k) g += z(j, k) * z(i, k);
          for (int k = j + 1; k <= l; ++k) g += z(k, j) * z(i, k);
          e[j] = g / h;
          f += e[j] * z(i, j);
        }
        const double hh = f / (h + h);
        for (int j = 0; j <= l; ++j) {
          f = z(i, j);
          e[j] = g = e[j] - hh * f;
          for (int k = 0; k <= j; ++k) z(j, k) -= f * e[k] + g * z(i, k);
        }
      }
    } else {
      e[i] = z(i, l);
    }
    d[i] = h;
  }
  d[0] = 0.0;
  e[0] = 0.0;
  for (int i = 0; i < n; ++i) {
    const int l = i;
    if (d[i] != 0.0) {
      for (int j = 0; j < l; ++j) {
        double g = 0.0;
        for (int k = 0; k < l; ++k) g += z(i, k) * z(k, j);
        for (int k = 0; k < l; ++k) z(k, j) -= g * z(k, i);
      }
    }
    d[i] = z(i, i);
    z(i, i) = 1.0;
    for (int j = 0; j < l; ++j) z(j, i) = z(i, j) = 0.0;
  }
}

// Implicit-shift QL on the tridiagonal (d, e), rotating the columns of z
// along (tql2 lineage).
void ql_implicit(Vector& d, Vector& e, Matrix& z) {
  const int n = static_cast<int>(d.size());
  constexpr double eps = 2.220446049250313e-16;
  for (int i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == 60)
          throw std::runtime_error("eig_sym_pencil: QL failed to converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double bb = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * bb;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - bb;
          for (int k = 0; k < n; ++k) {
            f = z(k, i + 1);
            z(k, i + 1) = s * z(k, i) + c * f;
            z(k, i) = c * z(k, i) - s * f;
          }
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

}  // namespace

PencilEig eig_sym_pencil(const Matrix& A, const Matrix& B) {
  if (!A.square() || !B.square() || A.rows != B.rows)
    throw std::invalid_argument("eig_sym_pencil: dimension mismatch");
  const int n = A.rows;
  const Matrix L = cholesky(B);  // throws NotSpdError when B is not SPD

  // C = L^{-1} A L^{-T}, formed by two triangular solves
  Matrix Y = A;
  {  // L Y = A (forward substitution on columns)
    for (int k = 0; k < n; ++k) {
      double* rk = Y.row(k);
      const double inv = 1.0 / L(k, k);
      for (int j = 0; j < n; ++j) rk[j] *= inv;
      for (int i = k + 1; i < n; ++i) {
        const double lik = L(i, k);
        if (lik == 0.0) continue;
        double* ri = Y.row(i);
        for (int j = 0; j < n; ++j) ri[j] -= lik * rk[j];
      }
    }
  }
  Matrix C = transpose(Y);
  {  // L Z = Y^T, then C = Z^T is symmetric up to roundoff
    for (int k = 0; k < n; ++k) {
      double* rk = C.row(k);
      const double inv = 1.0 / L(k, k);
      for (int j = 0; j < n; ++j) rk[j] *= inv;
      for (int i = k + 1; i < n; ++i) {
        const double lik = L(i, k);
        if (lik == 0.0) continue;
        double* ri = C.row(i);
        for (int j = 0; j < n; ++j) ri[j] -= lik * rk[j];
      }
    }
  }
  for (int i = 0; i < n; ++i)  // symmetrize
    for (int j = 0; j < i; ++j) {
      const double v = 0.5 * (C(i, j) + C(j, i));
      C(i, j) = C(j, i) = v;
    }

  Vector d(n, 0.0), e(n, 0.0);
  tridiagonalize(C, d, e);
  ql_implicit(d, e, C);

  // ascending order
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int i, int j) { return d[i] < d[j]; });

  PencilEig out;
  out.values.resize(n);
  Matrix Q(n, n);
  for (int j = 0; j < n; ++j) {
    out.values[j] = d[idx[j]];
    for (int i = 0; i < n; ++i) Q(i, j) = C(i, idx[j]);
  }

  // back-transform: X = L^{-T} Q, so X^T B X = Q^T Q = I
  for (int k = n - 1; k >= 0; --k) {
    double* rk = Q.row(k);
    const double inv = 1.0 / L(k, k);
    for (int j = 0; j < n; ++j) rk[j] *= inv;
    for (int i = 0; i < k; ++i) {
      const double lki = L(k, i);
      if (lki == 0.0) continue;
      double* ri = Q.row(i);
      for (int j = 0; j < n; ++j) ri[j] -= lki * rk[j];
    }
  }
  out.vectors = std::move(Q);
  return out;
}

}  // namespace wavobs::kernels
