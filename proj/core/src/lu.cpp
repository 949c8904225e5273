#include "fastla/lu.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fastla/inverse.hpp"
#include "fastla/qr.hpp"

namespace fastla {

std::string to_string(StepB s) { return s == StepB::solve ? "solve" : "invert"; }

StepB parse_step_b(const std::string& s) {
  if (s == "solve") return StepB::solve;
  if (s == "invert" || s == "invert-multiply") return StepB::invert_multiply;
  throw InvalidArgument("unknown step-b mode '" + s + "' (expected solve or invert)");
}

namespace {

constexpr Index kSolveBase = 8;

void substitute(const ConstMatrixRef& t, const MatrixRef& b, Uplo uplo, Diag diag, const MmEngine& engine) {
  const Index k = t.rows(), c = b.cols();
  auto row_step = [&](Index i) {
    double* bi = b.row(i);
    const Index lo = uplo == Uplo::lower ? 0 : i + 1;
    const Index hi = uplo == Uplo::lower ? i : k;
    for (Index p = lo; p < hi; ++p) {
      const double tip = t(i, p);
      const double* bp = b.row(p);
      for (Index j = 0; j < c; ++j) bi[j] -= tip * bp[j];
    }
    engine.count(static_cast<std::uint64_t>(hi - lo) * c, static_cast<std::uint64_t>(hi - lo) * c);
    if (diag == Diag::non_unit) {
      const double d = t(i, i);
      for (Index j = 0; j < c; ++j) bi[j] /= d;
      engine.count(c, 0);
    }
  };
  if (uplo == Uplo::lower)
    for (Index i = 0; i < k; ++i) row_step(i);
  else
    for (Index i = k; i-- > 0;) row_step(i);
}

void solve_rec(const ConstMatrixRef& t, const MatrixRef& b, Uplo uplo, Diag diag, const MmEngine& engine) {
  const Index k = t.rows();
  if (k <= kSolveBase) {
    substitute(t, b, uplo, diag, engine);
    return;
  }
  const Index h = k / 2, r = k - h, c = b.cols();
  const MatrixRef b1 = b.block(0, 0, h, c), b2 = b.block(h, 0, r, c);
  if (uplo == Uplo::lower) {
    solve_rec(t.block(0, 0, h, h), b1, uplo, diag, engine);
    multiply_add<double>(b2, t.block(h, 0, r, h), b1, engine, -1);
    solve_rec(t.block(h, h, r, r), b2, uplo, diag, engine);
  } else {
    solve_rec(t.block(h, h, r, r), b2, uplo, diag, engine);
    multiply_add<double>(b1, t.block(0, h, h, r), b2, engine, -1);
    solve_rec(t.block(0, 0, h, h), b1, uplo, diag, engine);
  }
}

void check_triangular(const ConstMatrixRef& t, Uplo uplo, Diag diag, const char* who) {
  if (t.rows() != t.cols()) throw DimensionError(std::string(who) + ": triangular factor must be square");
  const bool ok = uplo == Uplo::lower ? is_lower_triangular(t) : is_upper_triangular(t);
  if (!ok) throw InvalidArgument(std::string(who) + ": matrix is not triangular");
  if (diag == Diag::non_unit)
    for (Index i = 0; i < t.rows(); ++i)
      if (t(i, i) == 0.0) throw SingularMatrixError(std::string(who) + ": zero diagonal entry", i);
}

// Lower-triangular view of a packed LU block, with unit diagonal implied.
Matrix unit_lower_copy(const ConstMatrixRef& packed) {
  const Index k = packed.rows();
  Matrix l = Matrix::identity(k);
  for (Index i = 1; i < k; ++i)
    for (Index j = 0; j < i; ++j) l(i, j) = packed(i, j);
  return l;
}

void swap_rows(const MatrixRef& a, const std::vector<Index>& piv, Index offset) {
  for (Index k = 0; k < piv.size(); ++k)
    if (piv[k] != k) std::swap_ranges(a.row(offset + k), a.row(offset + k) + a.cols(), a.row(offset + piv[k]));
}

struct RecState {
  const MmEngine& engine;
  const LurConfig& cfg;
  double l_cond = 1.0;
};

// Factors the n x m view in place and returns view-relative pivots.
PanelLu lur_rec(const MatrixRef& a, RecState& st) {
  const Index n = a.rows(), m = a.cols();
  if (m <= std::max<Index>(st.cfg.panel_cutoff, 1)) return lu_panel(a, st.engine);

  const Index h = m / 2, r = m - h;
  PanelLu left = lur_rec(a.block(0, 0, n, h), st);

  const MatrixRef right = a.block(0, h, n, r);
  swap_rows(right, left.pivots, 0);

  const ConstMatrixRef packed11 = a.block(0, 0, h, h);
  const MatrixRef a12 = a.block(0, h, h, r);
  const Matrix l11 = unit_lower_copy(packed11);
  st.l_cond = std::max(st.l_cond, triangular_cond1_estimate(l11.view(), Uplo::lower, Diag::unit));
  if (st.cfg.step_b == StepB::solve) {
    solve_rec(l11.view(), a12, Uplo::lower, Diag::unit, st.engine);
  } else {
    // inv(L11) = inv(L11^T)^T with L11^T upper triangular.
    const Matrix l11t = transpose(l11);
    const Matrix inv = transpose(tri_inv_recursive<double>(l11t.view(), st.engine));
    const Matrix u12 = multiply<double>(inv.view(), ConstMatrixRef(a12), st.engine);
    a12.assign(u12.view());
  }

  multiply_add<double>(a.block(h, h, n - h, r), a.block(h, 0, n - h, h), a12, st.engine, -1);

  PanelLu lower = lur_rec(a.block(h, h, n - h, r), st);
  swap_rows(a.block(h, 0, n - h, h), lower.pivots, 0);

  PanelLu out;
  out.pivots = std::move(left.pivots);
  for (Index p : lower.pivots) out.pivots.push_back(p + h);
  out.zero_pivot = left.zero_pivot;
  if (!out.zero_pivot && lower.zero_pivot) out.zero_pivot = *lower.zero_pivot + h;
  return out;
}

}  // namespace

void solve_triangular_inplace(const ConstMatrixRef& t, const MatrixRef& b, Uplo uplo, Diag diag,
                              const MmEngine& engine) {
  check_triangular(t, uplo, diag, "solve_triangular");
  if (b.rows() != t.rows()) throw DimensionError("solve_triangular: rhs rows must match the factor");
  solve_rec(t, b, uplo, diag, engine);
}

Matrix solve_triangular(const ConstMatrixRef& t, const ConstMatrixRef& rhs, Side side, Uplo uplo, Diag diag,
                        const MmEngine& engine) {
  if (side == Side::left) {
    Matrix x(rhs);
    solve_triangular_inplace(t, x.view(), uplo, diag, engine);
    return x;
  }
  // X T = B  <=>  T^T X^T = B^T.
  if (rhs.cols() != t.rows()) throw DimensionError("solve_triangular: rhs cols must match the factor");
  const Matrix tt = transpose(t);
  Matrix xt = transpose(rhs);
  solve_triangular_inplace(tt.view(), xt.view(), uplo == Uplo::lower ? Uplo::upper : Uplo::lower, diag, engine);
  return xt.transpose();
}

double triangular_cond1_estimate(const ConstMatrixRef& t, Uplo uplo, Diag diag) {
  const Index n = t.rows();
  const MmEngine none;
  double tnorm = 0.0;
  for (Index j = 0; j < n; ++j) {
    double s = 0.0;
    for (Index i = 0; i < n; ++i) s += std::fabs((diag == Diag::unit && i == j) ? 1.0 : t(i, j));
    tnorm = std::max(tnorm, s);
  }
  Matrix tu(t);
  if (diag == Diag::unit)
    for (Index i = 0; i < n; ++i) tu(i, i) = 1.0;
  for (Index i = 0; i < n; ++i)
    if (tu(i, i) == 0.0) return std::numeric_limits<double>::infinity();
  const Matrix tt = transpose(tu);
  const Uplo tuplo = uplo == Uplo::lower ? Uplo::upper : Uplo::lower;

  // Hager's iteration on B = T^{-1}: maximize ||B x||_1 over the unit 1-ball.
  Matrix x(n, 1);
  for (Index i = 0; i < n; ++i) x(i, 0) = 1.0 / static_cast<double>(n);
  double est = 0.0;
  Index last = n;
  for (int iter = 0; iter < 5; ++iter) {
    Matrix y(x);
    substitute(tu.view(), y.view(), uplo, Diag::non_unit, none);
    double ny = 0.0;
    for (Index i = 0; i < n; ++i) ny += std::fabs(y(i, 0));
    if (ny <= est && iter > 0) break;
    est = ny;
    Matrix z(n, 1);
    for (Index i = 0; i < n; ++i) z(i, 0) = y(i, 0) >= 0.0 ? 1.0 : -1.0;
    substitute(tt.view(), z.view(), tuplo, Diag::non_unit, none);
    Index jmax = 0;
    for (Index i = 1; i < n; ++i)
      if (std::fabs(z(i, 0)) > std::fabs(z(jmax, 0))) jmax = i;
    if (jmax == last) break;
    last = jmax;
    x.view().fill(0.0);
    x(jmax, 0) = 1.0;
  }
  return std::max(1.0, tnorm * est);
}

double lu_residual(const ConstMatrixRef& a, const LuFactors& f) {
  const Matrix pa = permute_rows(a, f.perm);
  const Matrix lu = multiply(f.L.view(), f.U.view(), MmEngine::conventional());
  const double an = frobenius_norm(a);
  const double d = frobenius_distance(pa.view(), lu.view());
  return an > 0.0 ? d / an : d;
}

namespace {

void finish_report(LuResult& res, const ConstMatrixRef& a, const LurConfig& cfg) {
  res.report = StabilityReport{};
  res.report.residual = lu_residual(a, res);
  res.report.cond_estimate = res.l_cond;
  if (res.singular()) res.report.flags.push_back("zero-pivot");
  if (res.l_cond > cfg.l_cond_threshold) res.report.flags.push_back("l-cond-above-threshold");
}

}  // namespace

LuResult lur(const ConstMatrixRef& a, const MmEngine& engine, const LurConfig& cfg) {
  if (a.rows() < a.cols()) throw DimensionError("lur: needs rows >= cols");
  Matrix work(a);
  RecState st{engine, cfg};
  PanelLu p = lur_rec(work.view(), st);
  LuResult res;
  static_cast<LuFactors&>(res) = unpack_lu(work.view(), pivots_to_perm(p.pivots, a.rows()), a, p.zero_pivot);
  res.pivots = std::move(p.pivots);
  res.l_cond = std::max(st.l_cond, triangular_cond1_estimate(
                                       unit_lower_copy(work.block(0, 0, a.cols(), a.cols())).view(), Uplo::lower,
                                       Diag::unit));
  if (cfg.compute_report) finish_report(res, a, cfg);
  return res;
}

Matrix solve_linear(const ConstMatrixRef& a, const ConstMatrixRef& b, const MmEngine& engine) {
  if (a.rows() != a.cols()) throw DimensionError("solve_linear: matrix must be square");
  if (b.rows() != a.rows()) throw DimensionError("solve_linear: rows of b must equal n");
  LurConfig cfg;
  cfg.compute_report = false;
  const LuResult f = lur(a, engine, cfg);
  if (f.singular()) throw SingularMatrixError("solve_linear: matrix is singular", *f.zero_pivot);
  Matrix x = permute_rows(b, f.perm);
  solve_rec(f.L.view(), x.view(), Uplo::lower, Diag::unit, engine);
  solve_rec(f.U.view(), x.view(), Uplo::upper, Diag::non_unit, engine);
  return x;
}

LuResult columnwise_scale_wrap(const ConstMatrixRef& a, const std::function<LuResult(const ConstMatrixRef&)>& inner) {
  const ColumnScaling cs = scale_columns(a);
  LuResult res = inner(cs.scaled.view());
  for (Index i = 0; i < res.U.rows(); ++i)
    for (Index j = 0; j < res.U.cols(); ++j) res.U(i, j) *= cs.scale[j];
  const double amax = max_abs(a);
  res.growth = amax > 0.0 ? max_abs(res.U.view()) / amax : 1.0;
  LurConfig cfg;
  finish_report(res, a, cfg);
  if (!cs.zero_columns.empty()) res.report.flags.push_back("zero-column");
  return res;
}

}  // namespace fastla
