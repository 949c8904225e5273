#include "fastla/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fastla/error.hpp"
#include "fastla/matmul.hpp"
#include "fastla/norms.hpp"

namespace fastla {

namespace {

// Columns of the m x n input are the rows of `ut` (n x m) so the rotations
// touch contiguous memory.
void one_sided_jacobi(Matrix& ut, Matrix& vt) {
  const Index n = ut.rows(), m = ut.cols();
  const double tol = std::numeric_limits<double>::epsilon();
  for (int sweep = 0; sweep < 80; ++sweep) {
    bool rotated = false;
    for (Index p = 0; p + 1 < n; ++p)
      for (Index q = p + 1; q < n; ++q) {
        double alpha = 0, beta = 0, gamma = 0;
        const double* up = ut.data() + p * m;
        const double* uq = ut.data() + q * m;
        for (Index k = 0; k < m; ++k) {
          alpha += up[k] * up[k];
          beta += uq[k] * uq[k];
          gamma += up[k] * uq[k];
        }
        if (gamma == 0.0 || std::fabs(gamma) <= tol * std::sqrt(alpha) * std::sqrt(beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        auto rot = [&](double* x, double* y, Index len) {
          for (Index k = 0; k < len; ++k) {
            const double xp = x[k], yq = y[k];
            x[k] = c * xp - s * yq;
            y[k] = s * xp + c * yq;
          }
        };
        rot(ut.data() + p * m, ut.data() + q * m, m);
        rot(vt.data() + p * vt.cols(), vt.data() + q * vt.cols(), vt.cols());
      }
    if (!rotated) return;
  }
}

}  // namespace

SvdResult jacobi_svd(const ConstMatrixRef& a) {
  const Index m = a.rows(), n = a.cols();
  if (m < n) {
    const Matrix at = transpose(a);
    SvdResult r = jacobi_svd(at.view());
    std::swap(r.U, r.V);
    return r;
  }
  Matrix ut = transpose(a);
  Matrix vt = Matrix::identity(n);
  one_sided_jacobi(ut, vt);

  std::vector<double> sig(n);
  for (Index i = 0; i < n; ++i) {
    double s = 0;
    for (Index k = 0; k < m; ++k) s += ut(i, k) * ut(i, k);
    sig[i] = std::sqrt(s);
  }
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) { return sig[x] > sig[y]; });

  SvdResult r{Matrix(m, n), std::vector<double>(n), Matrix(n, n)};
  for (Index c = 0; c < n; ++c) {
    const Index i = order[c];
    r.s[c] = sig[i];
    for (Index k = 0; k < m; ++k) r.U(k, c) = sig[i] > 0.0 ? ut(i, k) / sig[i] : (k == c ? 1.0 : 0.0);
    for (Index k = 0; k < n; ++k) r.V(k, c) = vt(i, k);
  }
  return r;
}

std::vector<double> singular_values(const ConstMatrixRef& a) { return jacobi_svd(a).s; }

double sigma_min(const ConstMatrixRef& a) { return singular_values(a).back(); }
double sigma_max(const ConstMatrixRef& a) { return singular_values(a).front(); }

double condition_number(const ConstMatrixRef& a) {
  const auto s = singular_values(a);
  return s.back() > 0.0 ? s.front() / s.back() : std::numeric_limits<double>::infinity();
}

EighResult jacobi_eigh(const ConstMatrixRef& a0) {
  const Index n = a0.rows();
  if (n != a0.cols()) throw DimensionError("jacobi_eigh: matrix must be square");
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i; j < n; ++j) a(i, j) = a(j, i) = a0(i, j);
  Matrix v = Matrix::identity(n);
  const double scale = frobenius_norm(a.view());
  const double eps = std::numeric_limits<double>::epsilon();

  for (int sweep = 0; sweep < 80; ++sweep) {
    double off = 0;
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (std::sqrt(off) <= eps * eps * scale || scale == 0.0) break;
    for (Index p = 0; p + 1 < n; ++p)
      for (Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, tau) / (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
  }
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) { return a(x, x) < a(y, y); });
  EighResult r{std::vector<double>(n), Matrix(n, n)};
  for (Index c = 0; c < n; ++c) {
    r.values[c] = a(order[c], order[c]);
    for (Index k = 0; k < n; ++k) r.vectors(k, c) = v(k, order[c]);
  }
  return r;
}

MatrixDW dw_multiply(const ConstMatrixRef& a, const ConstMatrixRef& b) {
  return multiply<DoubleWord>(widen(a).view(), widen(b).view(), MmEngine::conventional());
}

MatrixDW dw_solve(const ConstMatrixRef& a0, const ConstMatrixRef& b0) {
  const Index n = a0.rows();
  if (n != a0.cols()) throw DimensionError("dw_solve: matrix must be square");
  if (b0.rows() != n) throw DimensionError("dw_solve: right-hand side rows must equal n");
  MatrixDW a = widen(a0), b = widen(b0);
  const Index m = b.cols();
  for (Index k = 0; k < n; ++k) {
    Index p = k;
    for (Index i = k + 1; i < n; ++i)
      if (abs(a(i, k)) > abs(a(p, k))) p = i;
    if (a(p, k) == DoubleWord(0.0)) throw SingularMatrixError("dw_solve: singular matrix", k);
    if (p != k) {
      std::swap_ranges(a.data() + k * n, a.data() + (k + 1) * n, a.data() + p * n);
      std::swap_ranges(b.data() + k * m, b.data() + (k + 1) * m, b.data() + p * m);
    }
    for (Index i = k + 1; i < n; ++i) {
      const DoubleWord l = a(i, k) / a(k, k);
      if (l == DoubleWord(0.0)) continue;
      for (Index j = k + 1; j < n; ++j) a(i, j) -= l * a(k, j);
      for (Index j = 0; j < m; ++j) b(i, j) -= l * b(k, j);
    }
  }
  MatrixDW x(n, m);
  for (Index j = 0; j < m; ++j)
    for (Index i = n; i-- > 0;) {
      DoubleWord s = b(i, j);
      for (Index k = i + 1; k < n; ++k) s -= a(i, k) * x(k, j);
      x(i, j) = s / a(i, i);
    }
  return x;
}

MatrixDW dw_inverse(const ConstMatrixRef& a) { return dw_solve(a, Matrix::identity(a.rows()).view()); }

MatrixDW dw_spd_inverse(const ConstMatrixRef& h) {
  const Index n = h.rows();
  if (n != h.cols()) throw DimensionError("dw_spd_inverse: matrix must be square");
  // H = L L^T, then H^{-1} = L^{-T} L^{-1}.
  MatrixDW l(n, n);
  for (Index j = 0; j < n; ++j) {
    DoubleWord d = DoubleWord(h(j, j));
    for (Index k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > DoubleWord(0.0))) throw NotPositiveDefiniteError("dw_spd_inverse: matrix is not positive definite");
    l(j, j) = sqrt(d);
    for (Index i = j + 1; i < n; ++i) {
      DoubleWord s = DoubleWord(h(i, j));
      for (Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  MatrixDW li(n, n);  // L^{-1}, lower triangular
  for (Index j = 0; j < n; ++j) {
    li(j, j) = DoubleWord(1.0) / l(j, j);
    for (Index i = j + 1; i < n; ++i) {
      DoubleWord s(0.0);
      for (Index k = j; k < i; ++k) s += l(i, k) * li(k, j);
      li(i, j) = -s / l(i, i);
    }
  }
  MatrixDW x(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j <= i; ++j) {
      DoubleWord s(0.0);
      for (Index k = i; k < n; ++k) s += li(k, i) * li(k, j);
      x(i, j) = x(j, i) = s;
    }
  return x;
}

MatrixDW dw_tri_inverse(const ConstMatrixRef& t) {
  const Index n = t.rows();
  if (n != t.cols()) throw DimensionError("dw_tri_inverse: matrix must be square");
  MatrixDW x(n, n);
  for (Index j = 0; j < n; ++j) {
    if (t(j, j) == 0.0) throw SingularMatrixError("dw_tri_inverse: zero diagonal", j);
    x(j, j) = DoubleWord(1.0) / DoubleWord(t(j, j));
    for (Index i = j; i-- > 0;) {
      DoubleWord s(0.0);
      for (Index k = i + 1; k <= j; ++k) s += DoubleWord(t(i, k)) * x(k, j);
      x(i, j) = -s / DoubleWord(t(i, i));
    }
  }
  return x;
}

Matrix kronecker_matrix(const ConstMatrixRef& a, const ConstMatrixRef& b) {
  const Index n = a.rows(), m = b.rows();
  Matrix k(n * m, n * m);
  // vec index of R(i, j) is j*n + i.
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < n; ++i) {
      const Index row = j * n + i;
      for (Index p = 0; p < n; ++p) k(row, j * n + p) += a(i, p);
      for (Index q = 0; q < m; ++q) k(row, q * n + i) -= b(q, j);
    }
  return k;
}

MatrixDW kronecker_sylvester(const ConstMatrixRef& a, const ConstMatrixRef& b, const ConstMatrixRef& c) {
  const Index n = a.rows(), m = b.rows();
  if (c.rows() != n || c.cols() != m) throw DimensionError("kronecker_sylvester: C must be n x m");
  const Matrix k = kronecker_matrix(a, b);
  Matrix rhs(n * m, 1);
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < n; ++i) rhs(j * n + i, 0) = -c(i, j);
  const MatrixDW v = dw_solve(k.view(), rhs.view());
  MatrixDW r(n, m);
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < n; ++i) r(i, j) = v(j * n + i, 0);
  return r;
}

double dw_distance(const ConstMatrixRef& x, const BasicConstRef<DoubleWord>& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) throw DimensionError("dw_distance: shape mismatch");
  DoubleWord s(0.0);
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < x.cols(); ++j) {
      const DoubleWord d = DoubleWord(x(i, j)) - y(i, j);
      s += d * d;
    }
  return std::sqrt(s.to_double());
}

}  // namespace fastla
