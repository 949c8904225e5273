#include "fastla/norms.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace fastla {

std::string to_string(NormKind k) {
  switch (k) {
    case NormKind::frobenius: return "frobenius";
    case NormKind::two: return "two";
    case NormKind::one: return "one";
    case NormKind::inf: return "inf";
    case NormKind::sum: return "sum";
  }
  return "frobenius";
}

NormKind parse_norm_kind(std::string_view s) {
  if (s == "frobenius" || s == "fro") return NormKind::frobenius;
  if (s == "two" || s == "2") return NormKind::two;
  if (s == "one" || s == "1") return NormKind::one;
  if (s == "inf") return NormKind::inf;
  if (s == "sum") return NormKind::sum;
  throw InvalidArgument("unknown norm kind '" + std::string(s) + "'");
}

double frobenius_norm(const ConstMatrixRef& a) {
  // Scaled accumulation so that entries near the overflow threshold survive.
  double scale = 0.0, ssq = 1.0;
  for (Index i = 0; i < a.rows(); ++i) {
    const double* r = a.row(i);
    for (Index j = 0; j < a.cols(); ++j) {
      const double v = std::fabs(r[j]);
      if (v == 0.0) continue;
      if (scale < v) {
        ssq = 1.0 + ssq * (scale / v) * (scale / v);
        scale = v;
      } else {
        ssq += (v / scale) * (v / scale);
      }
    }
  }
  return scale * std::sqrt(ssq);
}

double frobenius_norm(const BasicConstRef<DoubleWord>& a) {
  DoubleWord s(0.0);
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) s += a(i, j) * a(i, j);
  return std::sqrt(s.to_double());
}

double one_norm(const ConstMatrixRef& a) {
  std::vector<double> col(a.cols(), 0.0);
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) col[j] += std::fabs(a(i, j));
  return col.empty() ? 0.0 : *std::max_element(col.begin(), col.end());
}

double inf_norm(const ConstMatrixRef& a) {
  double best = 0.0;
  for (Index i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (Index j = 0; j < a.cols(); ++j) s += std::fabs(a(i, j));
    best = std::max(best, s);
  }
  return best;
}

double sum_norm(const ConstMatrixRef& a) {
  double s = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) s += std::fabs(a(i, j));
  return s;
}

double max_abs(const ConstMatrixRef& a) {
  double m = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) m = std::max(m, std::fabs(a(i, j)));
  return m;
}

double two_norm_estimate(const ConstMatrixRef& a, int max_iters, double tol) {
  const Index m = a.rows(), n = a.cols();
  if (n == 1 || m == 1) return frobenius_norm(a);
  const double scale = max_abs(a);
  if (scale == 0.0) return 0.0;

  // Deterministic start with no special alignment to coordinate axes.
  std::vector<double> x(n), y(m);
  for (Index j = 0; j < n; ++j) x[j] = 1.0 + 0.5 * std::sin(1.0 + 3.0 * static_cast<double>(j));
  double est = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    double xn = 0.0;
    for (double v : x) xn += v * v;
    xn = std::sqrt(xn);
    if (xn == 0.0) break;
    for (double& v : x) v /= xn;
    for (Index i = 0; i < m; ++i) {
      double s = 0.0;
      for (Index j = 0; j < n; ++j) s += (a(i, j) / scale) * x[j];
      y[i] = s;
    }
    double yn = 0.0;
    for (double v : y) yn += v * v;
    const double next = std::sqrt(yn);
    std::fill(x.begin(), x.end(), 0.0);
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < n; ++j) x[j] += (a(i, j) / scale) * y[i];
    if (it > 0 && std::fabs(next - est) <= tol * next) {
      est = next;
      break;
    }
    est = next;
  }
  return est * scale;
}

double frobenius_distance(const ConstMatrixRef& a, const ConstMatrixRef& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("frobenius_distance: shape mismatch");
  double s = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) {
      const double d = a(i, j) - b(i, j);
      s += d * d;
    }
  return std::sqrt(s);
}

double orthogonality_defect(const ConstMatrixRef& q) {
  const Index n = q.cols();
  double s = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = i; j < n; ++j) {
      double d = 0.0;
      for (Index k = 0; k < q.rows(); ++k) d += q(k, i) * q(k, j);
      if (i == j) d -= 1.0;
      s += (i == j ? 1.0 : 2.0) * d * d;
    }
  return std::sqrt(s);
}

double norm(const ConstMatrixRef& a, NormKind kind) {
  switch (kind) {
    case NormKind::frobenius: return frobenius_norm(a);
    case NormKind::two: return two_norm_estimate(a);
    case NormKind::one: return one_norm(a);
    case NormKind::inf: return inf_norm(a);
    case NormKind::sum: return sum_norm(a);
  }
  return frobenius_norm(a);
}

}  // namespace fastla
