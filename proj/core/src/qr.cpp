#include "fastla/qr.hpp"

#include <cmath>

#include "fastla/norms.hpp"
#include "fastla/oracle.hpp"

namespace fastla {

namespace {

// Factors the n x m view in place (it ends up holding [R; 0]) and returns the
// WY factor.
WYFactor qrr_rec(const MatrixRef& a, const MmEngine& engine, Index cutoff) {
  const Index n = a.rows(), m = a.cols();
  if (m <= cutoff) return wy_panel(a, engine).q;

  const Index h = m / 2;
  WYFactor left = qrr_rec(a.block(0, 0, n, h), engine, cutoff);

  auto right = a.block(0, h, n, m - h);
  const Matrix t = multiply(left.Y.view(), ConstMatrixRef(right), engine);
  multiply_add<double>(right, left.W.view(), t.view(), engine, -1);

  WYFactor lower = qrr_rec(a.block(h, h, n - h, m - h), engine, cutoff);
  return merge_wy(left, lower, h, engine);
}

}  // namespace

QrResult qrr(const ConstMatrixRef& a, const MmEngine& engine, const QrrConfig& cfg) {
  const Index n = a.rows(), m = a.cols();
  if (n < m) throw DimensionError("qrr: needs rows >= cols, got " + std::to_string(n) + "x" + std::to_string(m));
  Matrix work(a);
  QrResult out{Matrix(m, m), qrr_rec(work.view(), engine, std::max<Index>(1, cfg.panel_cutoff)), {}};
  for (Index i = 0; i < m; ++i)
    for (Index j = i; j < m; ++j) out.R(i, j) = work(i, j);
  if (cfg.compute_report) out.report = qr_report(a, out);
  return out;
}

StabilityReport qr_report(const ConstMatrixRef& a, const QrResult& r) {
  const Index n = a.rows(), m = a.cols();
  Matrix rr(n, m);
  rr.block(0, 0, m, m).assign(r.R.view());
  const Matrix qr = apply_q(r.q, rr.view());
  StabilityReport rep;
  const double an = frobenius_norm(a);
  rep.residual = an > 0.0 ? frobenius_distance(a, qr.view()) / an : frobenius_norm(qr.view());
  rep.orth_defect = orthogonality_defect(form_q(r.q).view());
  return rep;
}

Matrix back_substitute(const ConstMatrixRef& r, const ConstMatrixRef& b) {
  const Index m = r.rows();
  if (r.cols() != m || b.rows() < m) throw DimensionError("back_substitute: shape mismatch");
  Matrix x(m, b.cols());
  for (Index j = 0; j < b.cols(); ++j)
    for (Index i = m; i-- > 0;) {
      double s = b(i, j);
      for (Index k = i + 1; k < m; ++k) s -= r(i, k) * x(k, j);
      if (r(i, i) == 0.0) throw SingularMatrixError("triangular factor has a zero diagonal entry", i);
      x(i, j) = s / r(i, i);
    }
  return x;
}

Matrix solve_ls(const ConstMatrixRef& a, const ConstMatrixRef& b, const MmEngine& engine) {
  if (b.rows() != a.rows()) throw DimensionError("solve_ls: rows of b must equal rows of A");
  const QrResult f = qrr(a, engine, {8, false});
  for (Index i = 0; i < f.R.rows(); ++i)
    if (f.R(i, i) == 0.0) throw SingularMatrixError("solve_ls: A is rank deficient", i);
  const Matrix c = apply_qt(f.q, b, engine);
  return back_substitute(f.R.view(), c.view());
}

double determinant(const ConstMatrixRef& a, const MmEngine& engine) {
  if (a.rows() != a.cols()) throw DimensionError("determinant: matrix must be square");
  const QrResult f = qrr(a, engine, {8, false});
  double det = (a.rows() % 2 == 0) ? 1.0 : -1.0;
  for (Index i = 0; i < f.R.rows(); ++i) det *= f.R(i, i);
  return det == 0.0 ? 0.0 : det;
}

ColumnScaling scale_columns(const ConstMatrixRef& a) {
  ColumnScaling s{Matrix(a), std::vector<double>(a.cols(), 1.0), {}};
  for (Index j = 0; j < a.cols(); ++j) {
    double mx = 0.0;
    for (Index i = 0; i < a.rows(); ++i) mx = std::max(mx, std::fabs(a(i, j)));
    if (mx == 0.0) {
      s.zero_columns.push_back(j);
      continue;
    }
    s.scale[j] = mx;
    for (Index i = 0; i < a.rows(); ++i) s.scaled(i, j) = a(i, j) / mx;
  }
  return s;
}

QrResult columnwise_scale_wrap(const ConstMatrixRef& a, const std::function<QrResult(const ConstMatrixRef&)>& inner) {
  const ColumnScaling s = scale_columns(a);
  QrResult r = inner(s.scaled.view());
  for (Index i = 0; i < r.R.rows(); ++i)
    for (Index j = i; j < r.R.cols(); ++j) r.R(i, j) *= s.scale[j];
  r.report = qr_report(a, r);
  if (!s.zero_columns.empty()) r.report.flags.push_back("zero-column");
  return r;
}

std::vector<double> columnwise_residuals(const ConstMatrixRef& a, const QrResult& r) {
  const Index n = a.rows(), m = a.cols();
  const Matrix q = form_q(r.q);
  Matrix rr(n, m);
  rr.block(0, 0, m, m).assign(r.R.view());
  const MatrixDW qr = dw_multiply(q.view(), rr.view());
  std::vector<double> out(m);
  for (Index j = 0; j < m; ++j) {
    DoubleWord num(0.0);
    double den = 0.0;
    for (Index i = 0; i < n; ++i) {
      const DoubleWord d = DoubleWord(a(i, j)) - qr(i, j);
      num += d * d;
      den += a(i, j) * a(i, j);
    }
    out[j] = den > 0.0 ? std::sqrt(num.to_double() / den) : std::sqrt(num.to_double());
  }
  return out;
}

}  // namespace fastla
