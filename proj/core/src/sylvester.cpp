#include "fastla/sylvester.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "fastla/baseline.hpp"
#include "fastla/oracle.hpp"
#include "fastla/precision.hpp"

namespace fastla {

std::string to_string(SepMethod m) {
  switch (m) {
    case SepMethod::exact_kronecker: return "exact-kronecker";
    case SepMethod::kronecker_iteration: return "kronecker-iteration";
    case SepMethod::diagonal_upper_bound: return "diagonal-upper-bound";
  }
  return "unknown";
}

namespace {

bool atomic(const ConstMatrixRef& t) { return t.rows() == 1 || (t.rows() == 2 && t(1, 0) != 0.0); }

// Split index near the middle that does not cut a 2 x 2 bump.
Index split_point(const ConstMatrixRef& t) {
  Index h = t.rows() / 2;
  if (t(h, h - 1) != 0.0) ++h;
  return h;
}

// Dense solve of the (at most 4 x 4) Kronecker system for atomic blocks.
void base_solve(const ConstMatrixRef& a, const ConstMatrixRef& b, const ConstMatrixRef& c, const MatrixRef& r,
                const MmEngine& engine) {
  const Index n = a.rows(), m = b.rows();
  if (n == 1 && m == 1) {
    const double d = a(0, 0) - b(0, 0);
    if (d == 0.0) throw SingularMatrixError("sylr: A and B share an eigenvalue", 0);
    r(0, 0) = -c(0, 0) / d;
    engine.count(1, 1);
    return;
  }
  const Index k = n * m;
  double kmat[4][5];
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < n; ++i) {
      const Index row = j * n + i;
      for (Index q = 0; q < m; ++q)
        for (Index p = 0; p < n; ++p) {
          double v = 0.0;
          if (q == j) v += a(i, p);
          if (p == i) v -= b(q, j);
          kmat[row][q * n + p] = v;
        }
      kmat[row][k] = -c(i, j);
    }
  for (Index col = 0; col < k; ++col) {
    Index piv = col;
    for (Index i = col + 1; i < k; ++i)
      if (std::fabs(kmat[i][col]) > std::fabs(kmat[piv][col])) piv = i;
    if (kmat[piv][col] == 0.0) throw SingularMatrixError("sylr: A and B share an eigenvalue", 0);
    if (piv != col)
      for (Index j = 0; j <= k; ++j) std::swap(kmat[piv][j], kmat[col][j]);
    for (Index i = col + 1; i < k; ++i) {
      const double f = kmat[i][col] / kmat[col][col];
      for (Index j = col; j <= k; ++j) kmat[i][j] -= f * kmat[col][j];
    }
  }
  double x[4];
  for (Index i = k; i-- > 0;) {
    double s = kmat[i][k];
    for (Index j = i + 1; j < k; ++j) s -= kmat[i][j] * x[j];
    x[i] = s / kmat[i][i];
  }
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < n; ++i) r(i, j) = x[j * n + i];
  engine.count(k * k * k / 3 + k * k, k * k * k / 3 + k * k);
}

void sylr_rec(const ConstMatrixRef& a, const ConstMatrixRef& b, const ConstMatrixRef& c, const MatrixRef& r,
              const MmEngine& engine) {
  const bool aa = atomic(a), ab = atomic(b);
  const Index n = a.rows(), m = b.rows();
  if (aa && ab) {
    base_solve(a, b, c, r, engine);
    return;
  }
  if (ab) {
    // Rows only: A22 R2 - R2 B = -C2, then A11 R1 - R1 B = -(C1 + A12 R2).
    const Index h = split_point(a), k = n - h;
    sylr_rec(a.block(h, h, k, k), b, c.block(h, 0, k, m), r.block(h, 0, k, m), engine);
    Matrix c1(c.block(0, 0, h, m));
    multiply_add<double>(c1.view(), a.block(0, h, h, k), r.block(h, 0, k, m), engine, +1);
    sylr_rec(a.block(0, 0, h, h), b, c1.view(), r.block(0, 0, h, m), engine);
    return;
  }
  if (aa) {
    // Columns only: A R1 - R1 B11 = -C1, then A R2 - R2 B22 = -(C2 - R1 B12).
    const Index h = split_point(b), k = m - h;
    sylr_rec(a, b.block(0, 0, h, h), c.block(0, 0, n, h), r.block(0, 0, n, h), engine);
    Matrix c2(c.block(0, h, n, k));
    multiply_add<double>(c2.view(), r.block(0, 0, n, h), b.block(0, h, h, k), engine, -1);
    sylr_rec(a, b.block(h, h, k, k), c2.view(), r.block(0, h, n, k), engine);
    return;
  }
  const Index ha = split_point(a), ka = n - ha;
  const Index hb = split_point(b), kb = m - hb;
  const auto a11 = a.block(0, 0, ha, ha), a12 = a.block(0, ha, ha, ka), a22 = a.block(ha, ha, ka, ka);
  const auto b11 = b.block(0, 0, hb, hb), b12 = b.block(0, hb, hb, kb), b22 = b.block(hb, hb, kb, kb);
  const MatrixRef r11 = r.block(0, 0, ha, hb), r12 = r.block(0, hb, ha, kb);
  const MatrixRef r21 = r.block(ha, 0, ka, hb), r22 = r.block(ha, hb, ka, kb);

  sylr_rec(a22, b11, c.block(ha, 0, ka, hb), r21, engine);

  Matrix c11(c.block(0, 0, ha, hb));
  multiply_add<double>(c11.view(), a12, r21, engine, +1);
  sylr_rec(a11, b11, c11.view(), r11, engine);

  Matrix c22(c.block(ha, hb, ka, kb));
  multiply_add<double>(c22.view(), r21, b12, engine, -1);
  sylr_rec(a22, b22, c22.view(), r22, engine);

  Matrix c12(c.block(0, hb, ha, kb));
  multiply_add<double>(c12.view(), r11, b12, engine, -1);
  multiply_add<double>(c12.view(), a12, r22, engine, +1);
  sylr_rec(a11, b22, c12.view(), r12, engine);
}

// Eigenvalues of the 1 x 1 and 2 x 2 diagonal blocks.
std::vector<std::complex<double>> block_eigenvalues(const ConstMatrixRef& t) {
  std::vector<std::complex<double>> ev;
  for (Index i = 0; i < t.rows();) {
    if (i + 1 < t.rows() && t(i + 1, i) != 0.0) {
      const double p = 0.5 * (t(i, i) + t(i + 1, i + 1));
      const double det = t(i, i) * t(i + 1, i + 1) - t(i, i + 1) * t(i + 1, i);
      const std::complex<double> disc = std::sqrt(std::complex<double>(p * p - det));
      ev.push_back(p + disc);
      ev.push_back(p - disc);
      i += 2;
    } else {
      ev.emplace_back(t(i, i), 0.0);
      ++i;
    }
  }
  return ev;
}

// Reverses rows and columns, so lower quasi-triangular becomes upper.
Matrix flip(const ConstMatrixRef& x) {
  const Index n = x.rows(), m = x.cols();
  Matrix y(n, m);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j) y(i, j) = x(n - 1 - i, m - 1 - j);
  return y;
}

double relative_residual(const ConstMatrixRef& a, const ConstMatrixRef& b, const ConstMatrixRef& c,
                         const Matrix& r) {
  const MmEngine conv = MmEngine::conventional();
  Matrix res(c);
  multiply_add<double>(res.view(), a, r.view(), conv, +1);
  multiply_add<double>(res.view(), r.view(), b, conv, -1);
  const double denom = (frobenius_norm(a) + frobenius_norm(b)) * frobenius_norm(r.view());
  const double num = frobenius_norm(res.view());
  return denom > 0.0 ? num / denom : num;
}

}  // namespace

void validate_sylvester(const ConstMatrixRef& a, const ConstMatrixRef& b, const ConstMatrixRef& c) {
  if (a.rows() != a.cols() || b.rows() != b.cols()) throw DimensionError("sylvester: A and B must be square");
  if (c.rows() != a.rows() || c.cols() != b.rows()) throw DimensionError("sylvester: C must be n x m");
  if (!is_quasi_upper_triangular(a)) throw InvalidArgument("sylvester: A must be upper (quasi-)triangular");
  if (!is_quasi_upper_triangular(b)) throw InvalidArgument("sylvester: B must be upper (quasi-)triangular");
  const auto ea = block_eigenvalues(a), eb = block_eigenvalues(b);
  for (Index i = 0; i < ea.size(); ++i)
    for (const auto& y : eb)
      if (ea[i] == y) throw SingularMatrixError("sylvester: A and B share an eigenvalue", i);
}

SylrResult sylr(const ConstMatrixRef& a, const ConstMatrixRef& b, const ConstMatrixRef& c, const MmEngine& engine) {
  validate_sylvester(a, b, c);
  SylrResult out{Matrix(c.rows(), c.cols()), {}};
  sylr_rec(a, b, c, out.R.view(), engine);
  out.report.residual = relative_residual(a, b, c, out.R);
  return out;
}

SylrResult sylr(const SylvesterProblem& p, const MmEngine& engine) { return sylr(p.A.view(), p.B.view(), p.C.view(), engine); }

SepEstimate sep_estimate(const ConstMatrixRef& a, const ConstMatrixRef& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols()) throw DimensionError("sep_estimate: A and B must be square");
  if (!is_quasi_upper_triangular(a) || !is_quasi_upper_triangular(b))
    throw InvalidArgument("sep_estimate: A and B must be upper (quasi-)triangular");
  const Index n = a.rows(), m = b.rows(), nm = n * m;
  if (nm <= 256) {
    const Matrix k = kronecker_matrix(a, b);
    return {sigma_min(k.view()), SepMethod::exact_kronecker};
  }
  if (nm > 4096) {
    double v = std::numeric_limits<double>::infinity();
    for (const auto& x : block_eigenvalues(a))
      for (const auto& y : block_eigenvalues(b)) v = std::min(v, std::abs(x - y));
    return {v, SepMethod::diagonal_upper_bound};
  }
  // Power iteration with K^{-T} K^{-1}: ||K^{-1} x|| converges to 1/sep.
  for (const auto& x : block_eigenvalues(a))
    for (const auto& y : block_eigenvalues(b))
      if (x == y) return {0.0, SepMethod::kronecker_iteration};
  const MmEngine conv = MmEngine::conventional();
  const Matrix at = flip(transpose(a).view()), bt = flip(transpose(b).view());
  Matrix x(n, m);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j) x(i, j) = 1.0 + 0.5 * std::sin(1.0 + 3.0 * double(i) + 7.0 * double(j));
  x = scaled(x.view(), 1.0 / frobenius_norm(x.view()));
  double est = 0.0;
  for (int it = 0; it < 2000; ++it) {
    Matrix y(n, m);
    sylr_rec(a, b, scaled(x.view(), -1.0).view(), y.view(), conv);  // y = K^{-1} x
    const double ny = frobenius_norm(y.view());
    // z = K^{-T} y through the flipped transposed equation.
    Matrix zf(n, m);
    sylr_rec(at.view(), bt.view(), scaled(flip(y.view()).view(), -1.0).view(), zf.view(), conv);
    const Matrix z = flip(zf.view());
    const double nz = frobenius_norm(z.view());
    if (!(nz > 0.0) || !std::isfinite(nz)) return {0.0, SepMethod::kronecker_iteration};
    x = scaled(z.view(), 1.0 / nz);
    const bool done = it > 3 && std::fabs(ny - est) <= 1e-13 * ny;
    est = ny;
    if (done) break;
  }
  return {1.0 / est, SepMethod::kronecker_iteration};
}

double sylr_predicted_bound(Index n, Index m, double norm_a, double norm_b, double norm_c, double norm_r, double sep,
                            const MmEngine& engine) {
  if (!(sep > 0.0) || !(norm_r > 0.0)) return 1.0;
  const double ab = norm_a + norm_b;
  Index size = std::max(n, m);
  // Unroll from the leaves: err(1) = eps.
  std::vector<Index> sizes;
  while (size > 1) {
    sizes.push_back(size);
    size = (size + 1) / 2;
  }
  double err = kEps;
  for (Index k = sizes.size(); k-- > 0;) {
    const Index half = (sizes[k] + 1) / 2;
    err = (4.0 + 2.0 * ab / sep) * err + kEps / sep * (3.0 * norm_c / norm_r + 2.0 * mu_bound(engine, half) * ab);
    if (err >= 1.0) return 1.0;
  }
  return std::min(1.0, err);
}

double sylr_oracle_equivalence(const SylvesterProblem& p, double sep) {
  const SylrResult s = sylr(p, MmEngine::conventional());
  const Matrix c = conventional_sylvester(p.A.view(), p.B.view(), p.C.view());
  const double nr = frobenius_norm(c.view());
  const double d = frobenius_distance(s.R.view(), c.view());
  if (nr == 0.0) return d == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  const double scale = kEps * nr * (frobenius_norm(p.A.view()) + frobenius_norm(p.B.view())) / sep;
  return d / scale;
}

}  // namespace fastla
