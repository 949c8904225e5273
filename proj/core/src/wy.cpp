#include "fastla/wy.hpp"

#include <cmath>

namespace fastla {

Reflector householder_reflector(const double* x, Index k, Index stride) {
  Reflector h;
  h.w.assign(k, 0.0);
  double scale = 0.0;
  for (Index i = 0; i < k; ++i) scale = std::max(scale, std::fabs(x[i * stride]));
  if (scale == 0.0) {
    h.w[0] = 1.0;
    h.r = 0.0;
    return h;
  }
  double ssq = 0.0;
  for (Index i = 0; i < k; ++i) {
    const double t = x[i * stride] / scale;
    ssq += t * t;
  }
  const double alpha = scale * std::sqrt(ssq);
  const double x1 = x[0];
  const double s = x1 >= 0.0 ? 1.0 : -1.0;
  h.r = -s * alpha;
  // ||v||^2 = 2 alpha (alpha + |x1|) for v = x + s alpha e_1; no cancellation.
  double vnorm = std::sqrt(2.0 * alpha * (alpha + std::fabs(x1)));
  if (!std::isfinite(vnorm)) vnorm = std::sqrt(2.0 * alpha) * std::sqrt(alpha + std::fabs(x1));
  h.w[0] = (x1 + s * alpha) / vnorm;
  for (Index i = 1; i < k; ++i) h.w[i] = x[i * stride] / vnorm;
  return h;
}

PanelQr wy_panel(const MatrixRef& a, const MmEngine& engine) {
  const Index n = a.rows(), m = a.cols();
  if (n < m) throw DimensionError("wy_panel: needs rows >= cols");
  PanelQr out{Matrix(m, m), WYFactor{Matrix(n, m), Matrix(m, n)}};
  Matrix& W = out.q.W;
  Matrix& Y = out.q.Y;
  std::vector<double> t(std::max(m, Index(1)));

  for (Index j = 0; j < m; ++j) {
    const Index k = n - j;
    const Reflector h = householder_reflector(&a(j, j), k, a.stride());

    // Remaining columns of the panel: a <- a - w (2 w^T a).
    for (Index c = j + 1; c < m; ++c) {
      double s = 0.0;
      for (Index i = 0; i < k; ++i) s += h.w[i] * a(j + i, c);
      t[c] = 2.0 * s;
    }
    for (Index i = 0; i < k; ++i)
      for (Index c = j + 1; c < m; ++c) a(j + i, c) -= h.w[i] * t[c];
    a(j, j) = h.r;
    for (Index i = 1; i < k; ++i) a(j + i, j) = 0.0;

    // Earlier columns of W are carried through the new reflector.
    for (Index c = 0; c < j; ++c) {
      double s = 0.0;
      for (Index i = 0; i < k; ++i) s += h.w[i] * W(j + i, c);
      t[c] = 2.0 * s;
    }
    for (Index i = 0; i < k; ++i)
      for (Index c = 0; c < j; ++c) W(j + i, c) -= h.w[i] * t[c];
    for (Index i = 0; i < k; ++i) {
      W(j + i, j) = h.w[i];
      Y(j, j + i) = 2.0 * h.w[i];
    }
    // Reflector: k squares and k divisions; each of the other m-1 columns
    // costs a dot product and an axpy of length k.
    const std::uint64_t kk = k;
    engine.count(2 * kk + 2 * kk * (m - 1), kk + 2 * kk * (m - 1));
  }
  for (Index i = 0; i < m; ++i)
    for (Index j = i; j < m; ++j) out.R(i, j) = a(i, j);
  return out;
}

WYFactor merge_wy(const WYFactor& first, const WYFactor& second, Index offset, const MmEngine& engine) {
  const Index n = first.n(), m1 = first.m(), m2 = second.m();
  if (second.n() + offset != n) throw DimensionError("merge_wy: row ranges do not line up");
  WYFactor out{Matrix(n, m1 + m2), Matrix(m1 + m2, n)};
  out.W.block(0, 0, n, m1).assign(first.W.view());
  const Matrix yw = multiply(second.Y.view(), first.W.block(offset, 0, n - offset, m1), engine);
  multiply_add<double>(out.W.block(offset, 0, n - offset, m1), second.W.view(), yw.view(), engine, -1);
  out.W.block(offset, m1, n - offset, m2).assign(second.W.view());
  out.Y.block(0, 0, m1, n).assign(first.Y.view());
  out.Y.block(m1, offset, m2, n - offset).assign(second.Y.view());
  return out;
}

Matrix apply_qt(const WYFactor& q, const ConstMatrixRef& b, const MmEngine& engine) {
  if (b.rows() != q.n()) throw DimensionError("apply_qt: rows of b must equal n");
  Matrix out(b);
  const Matrix yb = multiply(q.Y.view(), b, engine);
  multiply_add<double>(out.view(), q.W.view(), yb.view(), engine, -1);
  return out;
}

Matrix apply_q(const WYFactor& q, const ConstMatrixRef& b, const MmEngine& engine) {
  if (b.rows() != q.n()) throw DimensionError("apply_q: rows of b must equal n");
  Matrix out(b);
  const Matrix wt = q.W.transpose();
  const Matrix yt = q.Y.transpose();
  const Matrix wb = multiply(wt.view(), b, engine);
  multiply_add<double>(out.view(), yt.view(), wb.view(), engine, -1);
  return out;
}

Matrix form_q(const WYFactor& q) { return apply_q(q, Matrix::identity(q.n()).view()); }

}  // namespace fastla
