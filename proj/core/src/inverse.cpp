#include "fastla/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fastla/norms.hpp"

namespace fastla {

template <class T>
BasicMatrix<T> tri_inv_recursive(const BasicConstRef<T>& t, const MmEngine& engine) {
  const Index n = t.rows();
  BasicMatrix<T> x(n, n);
  if (n == 1) {
    if (t(0, 0) == T(0.0)) throw SingularMatrixError("tri_inv: zero diagonal entry", 0);
    x(0, 0) = T(1.0) / t(0, 0);
    engine.count(1, 0);
    return x;
  }
  const Index h = n / 2, k = n - h;
  BasicMatrix<T> x11, x22;
  try {
    x11 = tri_inv_recursive<T>(t.block(0, 0, h, h), engine);
  } catch (const SingularMatrixError& e) {
    throw SingularMatrixError(e.what(), e.index());
  }
  try {
    x22 = tri_inv_recursive<T>(t.block(h, h, k, k), engine);
  } catch (const SingularMatrixError& e) {
    throw SingularMatrixError(e.what(), e.index() + h);
  }
  const BasicMatrix<T> x11t12 = multiply<T>(x11.view(), t.block(0, h, h, k), engine);
  const BasicMatrix<T> x12 = multiply<T>(x11t12.view(), x22.view(), engine);
  x.block(0, 0, h, h).assign(x11.view());
  x.block(h, h, k, k).assign(x22.view());
  for (Index i = 0; i < h; ++i)
    for (Index j = 0; j < k; ++j) x(i, h + j) = -x12(i, j);
  return x;
}

template BasicMatrix<double> tri_inv_recursive<double>(const BasicConstRef<double>&, const MmEngine&);
template BasicMatrix<DoubleWord> tri_inv_recursive<DoubleWord>(const BasicConstRef<DoubleWord>&, const MmEngine&);

namespace {

template <class T>
BasicMatrix<T> spd_inv_recursive(const BasicConstRef<T>& hm, const MmEngine& engine) {
  const Index n = hm.rows();
  BasicMatrix<T> hi(n, n);
  if (n == 1) {
    const T v = hm(0, 0);
    if (!(v > T(0.0)) || !isfinite(v)) throw NotPositiveDefiniteError("spd_inv: matrix is not positive definite");
    hi(0, 0) = T(1.0) / v;
    engine.count(1, 0);
    return hi;
  }
  const Index h = n / 2, k = n - h;
  const auto a = hm.block(0, 0, h, h);
  const auto b = hm.block(0, h, h, k);
  const auto c = hm.block(h, h, k, k);

  const BasicMatrix<T> ai = spd_inv_recursive<T>(a, engine);
  const BasicMatrix<T> aib = multiply<T>(ai.view(), b, engine);
  const BasicMatrix<T> bt = transpose(b);
  const BasicMatrix<T> baib = multiply<T>(bt.view(), aib.view(), engine);
  BasicMatrix<T> s(c);
  accumulate<T>(s.view(), baib.view(), -1, engine);
  const BasicMatrix<T> si = spd_inv_recursive<T>(s.view(), engine);
  const BasicMatrix<T> aibsi = multiply<T>(aib.view(), si.view(), engine);
  const BasicMatrix<T> aibt = transpose<T>(aib.view());
  const BasicMatrix<T> aibsibai = multiply<T>(aibsi.view(), aibt.view(), engine);
  BasicMatrix<T> hi11(ai);
  accumulate<T>(hi11.view(), aibsibai.view(), +1, engine);

  hi.block(0, 0, h, h).assign(hi11.view());
  hi.block(h, h, k, k).assign(si.view());
  for (Index i = 0; i < h; ++i)
    for (Index j = 0; j < k; ++j) {
      hi(i, h + j) = -aibsi(i, j);
      hi(h + j, i) = -aibsi(i, j);
    }
  return hi;
}

template <class T>
void symmetrize(BasicMatrix<T>& x) {
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = i + 1; j < x.cols(); ++j) {
      const T m = (x(i, j) + x(j, i)) * T(0.5);
      x(i, j) = m;
      x(j, i) = m;
    }
}

void fill_report(InvReport& r, const ConstMatrixRef& a, const Matrix& x, Precision p) {
  const MmEngine conv = MmEngine::conventional();
  const Matrix id = Matrix::identity(a.rows());
  r.residual_left = frobenius_distance(multiply(x.view(), a, conv).view(), id.view());
  r.residual_right = frobenius_distance(multiply(a, x.view(), conv).view(), id.view());
  r.kappa = std::max(1.0, two_norm_estimate(a) * two_norm_estimate(x.view()));
  r.precision_used = p;
}

// Error recurrences are written in units of the working epsilon; `unit` is
// the unit roundoff of the arithmetic actually used.
template <class Step>
double unroll(Index n, double base, const Step& step) {
  if (n <= 1) return base;
  const Index h = (n + 1) / 2;
  return step(h, unroll(h, base, step));
}

}  // namespace

double tri_inv_bound(Index n, double kappa, const MmEngine& engine, double unit) {
  // err(n) = 2 (kappa + 1) err(n/2) + 2 mu(n/2) eps kappa ||T^{-1}||, relative
  // to ||T^{-1}||, with err(1) = eps.
  const double e = unroll(n, unit, [&](Index h, double prev) {
    return 2.0 * (kappa + 1.0) * prev + 2.0 * mu_bound(engine, h) * unit * kappa;
  });
  return std::min(1.0, e);
}

double spd_inv_bound(Index n, double kappa, const MmEngine& engine, double unit) {
  // err(n) = 12 mu(n/2) eps kappa^4 / lambda + 10 kappa^4 err(n/2), relative to
  // ||H^{-1}|| = 1/lambda.
  const double k4 = kappa * kappa * kappa * kappa;
  const double e = unroll(n, unit, [&](Index h, double prev) {
    return 12.0 * mu_bound(engine, h) * unit * k4 + 10.0 * k4 * prev;
  });
  return std::min(1.0, e);
}

InvResult tri_inv(const ConstMatrixRef& t, const MmEngine& engine, Precision precision, bool compute_report) {
  if (t.rows() != t.cols()) throw DimensionError("tri_inv: matrix must be square");
  if (!is_upper_triangular(t)) throw InvalidArgument("tri_inv: matrix must be upper triangular");
  InvResult out;
  if (precision == Precision::working) {
    out.X = tri_inv_recursive<double>(t, engine);
  } else {
    const MatrixDW w = widen(t);
    out.X = narrow(tri_inv_recursive<DoubleWord>(w.view(), engine).view());
  }
  if (compute_report) {
    fill_report(out.report, t, out.X, precision);
    out.report.predicted_bound = tri_inv_bound(t.rows(), out.report.kappa, engine, unit_roundoff(precision));
  }
  return out;
}

InvResult spd_inv(const ConstMatrixRef& h, const MmEngine& engine, Precision precision, bool compute_report) {
  if (h.rows() != h.cols()) throw DimensionError("spd_inv: matrix must be square");
  const double hn = frobenius_norm(h);
  double asym = 0.0;
  for (Index i = 0; i < h.rows(); ++i)
    for (Index j = i + 1; j < h.cols(); ++j) asym += 2.0 * (h(i, j) - h(j, i)) * (h(i, j) - h(j, i));
  if (std::sqrt(asym) > 1e-12 * hn) throw InvalidArgument("spd_inv: matrix is not symmetric");

  InvResult out;
  if (precision == Precision::working) {
    out.X = spd_inv_recursive<double>(h, engine);
    symmetrize(out.X);
  } else {
    const MatrixDW w = widen(h);
    MatrixDW x = spd_inv_recursive<DoubleWord>(w.view(), engine);
    symmetrize(x);
    out.X = narrow(x.view());
  }
  if (compute_report) {
    fill_report(out.report, h, out.X, precision);
    out.report.predicted_bound = spd_inv_bound(h.rows(), out.report.kappa, engine, unit_roundoff(precision));
  }
  return out;
}

namespace {

template <class T>
BasicMatrix<T> general_inverse(const BasicConstRef<T>& a, const MmEngine& engine) {
  const BasicMatrix<T> at = transpose(a);
  BasicMatrix<T> g = multiply<T>(a, at.view(), engine);
  symmetrize(g);
  BasicMatrix<T> gi;
  try {
    gi = spd_inv_recursive<T>(g.view(), engine);
  } catch (const NotPositiveDefiniteError&) {
    throw SingularMatrixError("gen_inv: A A^T is not numerically positive definite", 0);
  }
  symmetrize(gi);
  return multiply<T>(at.view(), gi.view(), engine);
}

}  // namespace

InvResult gen_inv(const ConstMatrixRef& a, const MmEngine& engine, Precision precision, bool compute_report) {
  if (a.rows() != a.cols()) throw DimensionError("gen_inv: matrix must be square");
  InvResult out;
  if (precision == Precision::working) {
    out.X = general_inverse<double>(a, engine);
  } else {
    const MatrixDW w = widen(a);
    out.X = narrow(general_inverse<DoubleWord>(w.view(), engine).view());
  }
  for (double v : out.X.values())
    if (!std::isfinite(v)) throw SingularMatrixError("gen_inv: inverse is not finite", 0);
  if (compute_report) {
    fill_report(out.report, a, out.X, precision);
    const double k = out.report.kappa;
    // The Gram matrix squares kappa; the two outer products add mu terms.
    const double u = unit_roundoff(precision);
    const double inner = spd_inv_bound(a.rows(), k * k, engine, u);
    out.report.predicted_bound = std::min(1.0, inner + 2.0 * mu_bound(engine, a.rows()) * u * k * k);
  }
  return out;
}

Matrix solve_via_inverse(const ConstMatrixRef& a, const ConstMatrixRef& b, const MmEngine& engine,
                         Precision precision) {
  if (a.rows() != a.cols()) throw DimensionError("solve_via_inverse: matrix must be square");
  if (b.rows() != a.rows()) throw DimensionError("solve_via_inverse: rows of b must equal n");
  auto run = [&](auto tag) {
    using T = decltype(tag);
    const BasicMatrix<T> aw = [&] {
      if constexpr (std::is_same_v<T, double>) return Matrix(a);
      else return widen(a);
    }();
    const BasicMatrix<T> bw = [&] {
      if constexpr (std::is_same_v<T, double>) return Matrix(b);
      else return widen(b);
    }();
    const BasicMatrix<T> at = transpose<T>(aw.view());
    BasicMatrix<T> g = multiply<T>(aw.view(), at.view(), engine);
    symmetrize(g);
    BasicMatrix<T> gi;
    try {
      gi = spd_inv_recursive<T>(g.view(), engine);
    } catch (const NotPositiveDefiniteError&) {
      throw SingularMatrixError("solve_via_inverse: A A^T is not numerically positive definite", 0);
    }
    const BasicMatrix<T> y = multiply<T>(gi.view(), bw.view(), engine);
    return multiply<T>(at.view(), y.view(), engine);
  };
  if (precision == Precision::working) return run(0.0);
  return narrow(run(DoubleWord()).view());
}

Matrix theorem1_embedding(const ConstMatrixRef& a, const ConstMatrixRef& b, const Inverter& inverter) {
  if (a.cols() != b.rows()) throw DimensionError("theorem1_embedding: inner dimensions differ");
  const Index p = a.rows(), q = a.cols(), r = b.cols();
  const double na = frobenius_norm(a), nb = frobenius_norm(b);
  const double sa = na > 0.0 ? na : 1.0, sb = nb > 0.0 ? nb : 1.0;

  const Index n = p + q + r;
  Matrix m = Matrix::identity(n);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < q; ++j) m(i, p + j) = a(i, j) / sa;
  for (Index i = 0; i < q; ++i)
    for (Index j = 0; j < r; ++j) m(p + i, p + q + j) = b(i, j) / sb;

  const Matrix x = inverter(m.view());
  if (x.rows() != n || x.cols() != n) throw DimensionError("theorem1_embedding: inverter returned the wrong shape");
  Matrix ab(p, r);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < r; ++j) ab(i, j) = x(i, p + q + j) * sa * sb;
  return ab;
}

}  // namespace fastla
