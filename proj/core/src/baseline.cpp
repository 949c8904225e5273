#include "fastla/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fastla/norms.hpp"

namespace fastla {

QrFactors householder_qr(const ConstMatrixRef& a) {
  const Index n = a.rows(), m = a.cols();
  if (n < m) throw DimensionError("householder_qr: needs rows >= cols");
  Matrix work(a);
  PanelQr p = wy_panel(work.view());

  Matrix e(n, m);
  for (Index i = 0; i < m; ++i) e(i, i) = 1.0;
  QrFactors out{apply_q(p.q, e.view()), std::move(p.R)};
  for (Index i = 0; i < m; ++i) {
    if (out.R(i, i) < 0.0) {
      for (Index j = i; j < m; ++j) out.R(i, j) = -out.R(i, j);
      for (Index k = 0; k < n; ++k) out.Q(k, i) = -out.Q(k, i);
    }
  }
  return out;
}

PanelLu lu_panel(const MatrixRef& a, const MmEngine& engine) {
  const Index n = a.rows(), m = a.cols();
  if (n < m) throw DimensionError("lu_panel: needs rows >= cols");
  PanelLu out;
  out.pivots.resize(m);
  for (Index k = 0; k < m; ++k) {
    Index p = k;
    double best = std::fabs(a(k, k));
    for (Index i = k + 1; i < n; ++i) {
      const double v = std::fabs(a(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    out.pivots[k] = p;
    if (p != k) std::swap_ranges(a.row(k), a.row(k) + m, a.row(p));
    const double piv = a(k, k);
    if (piv == 0.0) {
      if (!out.zero_pivot) out.zero_pivot = k;
      continue;
    }
    for (Index i = k + 1; i < n; ++i) a(i, k) /= piv;
    for (Index i = k + 1; i < n; ++i) {
      const double lik = a(i, k);
      double* ai = a.row(i);
      const double* ak = a.row(k);
      for (Index j = k + 1; j < m; ++j) ai[j] -= lik * ak[j];
    }
    const std::uint64_t below = n - k - 1, right = m - k - 1;
    engine.count(below + below * right, below * right);
  }
  return out;
}

std::vector<Index> pivots_to_perm(const std::vector<Index>& pivots, Index n) {
  std::vector<Index> perm(n);
  for (Index i = 0; i < n; ++i) perm[i] = i;
  for (Index k = 0; k < pivots.size(); ++k) std::swap(perm[k], perm[pivots[k]]);
  return perm;
}

Matrix permute_rows(const ConstMatrixRef& a, const std::vector<Index>& perm) {
  if (perm.size() != a.rows()) throw DimensionError("permute_rows: permutation length mismatch");
  Matrix out(a.rows(), a.cols());
  for (Index i = 0; i < a.rows(); ++i) std::copy(a.row(perm[i]), a.row(perm[i]) + a.cols(), out.data() + i * a.cols());
  return out;
}

LuFactors unpack_lu(const ConstMatrixRef& packed, std::vector<Index> perm, const ConstMatrixRef& original,
                    std::optional<Index> zero_pivot) {
  const Index n = packed.rows(), m = packed.cols();
  LuFactors f{std::move(perm), Matrix(n, m), Matrix(m, m), 1.0, zero_pivot};
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j) {
      if (j < i) {
        f.L(i, j) = packed(i, j);
      } else {
        if (i == j) f.L(i, j) = 1.0;
        if (i < m) f.U(i, j) = packed(i, j);
      }
    }
  const double amax = max_abs(original);
  f.growth = amax > 0.0 ? max_abs(f.U.view()) / amax : 1.0;
  return f;
}

LuFactors gepp_lu(const ConstMatrixRef& a) {
  if (a.rows() != a.cols()) throw DimensionError("gepp_lu: matrix must be square");
  Matrix work(a);
  const PanelLu p = lu_panel(work.view());
  return unpack_lu(work.view(), pivots_to_perm(p.pivots, a.rows()), a, p.zero_pivot);
}

Index BlockConfig::recommended(Index n, double gamma) {
  if (!(gamma >= 2.0 && gamma <= 3.0)) throw InvalidArgument("block config: gamma must lie in [2, 3]");
  if (n == 0) throw InvalidArgument("block config: n must be positive");
  if (gamma == 3.0) return n;
  const double b = std::round(std::pow(static_cast<double>(n), 1.0 / (4.0 - gamma)));
  return std::clamp<Index>(static_cast<Index>(b), 1, n);
}

Index BlockConfig::resolve(Index n) const {
  if (block_size == 0) return recommended(n, gamma);
  return std::min(block_size, n);
}

double blocked_cost_exponent(double gamma) {
  if (!(gamma >= 2.0 && gamma <= 3.0)) throw InvalidArgument("gamma must lie in [2, 3]");
  return (9.0 - 2.0 * gamma) / (4.0 - gamma);
}

LuFactors block_lu(const ConstMatrixRef& a, const BlockConfig& cfg, const MmEngine& engine) {
  const Index n = a.rows();
  if (n != a.cols()) throw DimensionError("block_lu: matrix must be square");
  const Index b = cfg.resolve(n);
  Matrix work(a);
  std::vector<Index> pivots(n);
  std::optional<Index> zero_pivot;

  for (Index k0 = 0; k0 < n; k0 += b) {
    const Index kb = std::min(b, n - k0);
    const PanelLu p = lu_panel(work.block(k0, k0, n - k0, kb), engine);
    if (p.zero_pivot && !zero_pivot) zero_pivot = k0 + *p.zero_pivot;
    for (Index j = 0; j < kb; ++j) {
      const Index r1 = k0 + j, r2 = k0 + p.pivots[j];
      pivots[r1] = r2;
      if (r1 == r2) continue;
      std::swap_ranges(work.data() + r1 * n, work.data() + r1 * n + k0, work.data() + r2 * n);
      std::swap_ranges(work.data() + r1 * n + k0 + kb, work.data() + (r1 + 1) * n, work.data() + r2 * n + k0 + kb);
    }
    const Index rest = n - k0 - kb;
    if (rest == 0) continue;

    // U12 = L11^{-1} A12 by forward substitution (L11 unit lower).
    auto a12 = work.block(k0, k0 + kb, kb, rest);
    for (Index i = 1; i < kb; ++i)
      for (Index k = 0; k < i; ++k) {
        const double lik = work(k0 + i, k0 + k);
        for (Index j = 0; j < rest; ++j) a12(i, j) -= lik * a12(k, j);
      }
    const std::uint64_t tri = static_cast<std::uint64_t>(kb) * (kb - 1) / 2 * rest;
    engine.count(tri, tri);

    // Schur complement A22 -= L21 U12 through the engine.
    multiply_add<double>(work.block(k0 + kb, k0 + kb, rest, rest), work.block(k0 + kb, k0, rest, kb),
                         work.block(k0, k0 + kb, kb, rest), engine, -1);
  }
  return unpack_lu(work.view(), pivots_to_perm(pivots, n), a, zero_pivot);
}

BlockQrResult block_qr(const ConstMatrixRef& a, const BlockConfig& cfg, const MmEngine& engine) {
  const Index n = a.rows(), m = a.cols();
  if (n < m) throw DimensionError("block_qr: needs rows >= cols");
  const Index b = cfg.resolve(m);
  Matrix work(a);
  std::optional<WYFactor> acc;

  for (Index k0 = 0; k0 < m; k0 += b) {
    const Index kb = std::min(b, m - k0);
    PanelQr p = wy_panel(work.block(k0, k0, n - k0, kb), engine);
    const Index rest = m - k0 - kb;
    if (rest > 0) {
      auto trail = work.block(k0, k0 + kb, n - k0, rest);
      const Matrix yt = multiply(p.q.Y.view(), ConstMatrixRef(trail), engine);
      multiply_add<double>(trail, p.q.W.view(), yt.view(), engine, -1);
    }
    acc = acc ? merge_wy(*acc, p.q, k0, engine) : std::move(p.q);
  }

  BlockQrResult out{std::move(*acc), Matrix(m, m)};
  for (Index i = 0; i < m; ++i)
    for (Index j = i; j < m; ++j) out.R(i, j) = work(i, j);
  return out;
}

namespace {

void require_upper(const ConstMatrixRef& t, const char* what) {
  if (t.rows() != t.cols()) throw DimensionError(std::string(what) + " must be square");
  if (!is_upper_triangular(t)) throw InvalidArgument(std::string(what) + " must be upper triangular");
}

template <class T>
BasicMatrix<T> sylvester_substitution(const ConstMatrixRef& a, const ConstMatrixRef& b, const ConstMatrixRef& c) {
  require_upper(a, "conventional_sylvester: A");
  require_upper(b, "conventional_sylvester: B");
  const Index n = a.rows(), m = b.rows();
  if (c.rows() != n || c.cols() != m) throw DimensionError("conventional_sylvester: C must be n x m");
  BasicMatrix<T> r(n, m);
  std::vector<T> rhs(n);
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < n; ++i) {
      T s = -T(c(i, j));
      for (Index k = 0; k < j; ++k) s += r(i, k) * T(b(k, j));
      rhs[i] = s;
    }
    for (Index ii = n; ii-- > 0;) {
      T s = rhs[ii];
      for (Index k = ii + 1; k < n; ++k) s -= T(a(ii, k)) * r(k, j);
      const T d = T(a(ii, ii)) - T(b(j, j));
      if (d == T(0.0)) {
        throw SingularMatrixError("sylvester: A and B share the eigenvalue " + std::to_string(a(ii, ii)), ii);
      }
      r(ii, j) = s / d;
    }
  }
  return r;
}

}  // namespace

Matrix conventional_sylvester(const ConstMatrixRef& a, const ConstMatrixRef& b, const ConstMatrixRef& c) {
  return sylvester_substitution<double>(a, b, c);
}

MatrixDW conventional_sylvester_dw(const ConstMatrixRef& a, const ConstMatrixRef& b, const ConstMatrixRef& c) {
  return sylvester_substitution<DoubleWord>(a, b, c);
}

}  // namespace fastla
