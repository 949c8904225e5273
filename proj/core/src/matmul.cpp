#include "fastla/matmul.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fastla/norms.hpp"
#include "fastla/precision.hpp"

namespace fastla {

std::string to_string(EngineKind k) {
  switch (k) {
    case EngineKind::conventional: return "conventional";
    case EngineKind::strassen: return "strassen";
    case EngineKind::blocked: return "blocked";
  }
  return "conventional";
}

EngineKind parse_engine_kind(std::string_view s) {
  if (s == "conv" || s == "conventional") return EngineKind::conventional;
  if (s == "strassen") return EngineKind::strassen;
  if (s == "blocked") return EngineKind::blocked;
  throw InvalidArgument("unknown engine '" + std::string(s) + "'");
}

namespace {

// C (+)= A*B with the i-k-j loop order suited to row-major storage.
template <class T>
void conv_kernel(const BasicRef<T>& c, const BasicConstRef<T>& a, const BasicConstRef<T>& b, bool overwrite) {
  const Index p = a.rows(), q = a.cols(), r = b.cols();
  for (Index i = 0; i < p; ++i) {
    T* ci = c.row(i);
    if (overwrite) std::fill(ci, ci + r, T(0.0));
    const T* ai = a.row(i);
    for (Index k = 0; k < q; ++k) {
      const T aik = ai[k];
      const T* bk = b.row(k);
      for (Index j = 0; j < r; ++j) ci[j] += aik * bk[j];
    }
  }
}

template <class T>
void conventional(const BasicRef<T>& c, const BasicConstRef<T>& a, const BasicConstRef<T>& b, const MmEngine& e) {
  conv_kernel(c, a, b, true);
  const std::uint64_t p = a.rows(), q = a.cols(), r = b.cols();
  e.count(p * q * r, p * (q - 1) * r);
}

template <class T>
void blocked(const BasicRef<T>& c, const BasicConstRef<T>& a, const BasicConstRef<T>& b, const MmEngine& e) {
  const Index p = a.rows(), q = a.cols(), r = b.cols();
  const Index bs = std::max<Index>(1, e.block);
  c.fill(T(0.0));
  for (Index i0 = 0; i0 < p; i0 += bs) {
    const Index ni = std::min(bs, p - i0);
    for (Index k0 = 0; k0 < q; k0 += bs) {
      const Index nk = std::min(bs, q - k0);
      for (Index j0 = 0; j0 < r; j0 += bs) {
        const Index nj = std::min(bs, r - j0);
        conv_kernel(c.block(i0, j0, ni, nj), a.block(i0, k0, ni, nk), b.block(k0, j0, nk, nj), false);
      }
    }
  }
  const std::uint64_t pp = p, qq = q, rr = r;
  e.count(pp * qq * rr, pp * (qq - 1) * rr);
}

template <class T>
void add_to(const BasicRef<T>& z, const BasicConstRef<T>& x, const BasicConstRef<T>& y) {
  for (Index i = 0; i < z.rows(); ++i) {
    const T* xi = x.row(i);
    const T* yi = y.row(i);
    T* zi = z.row(i);
    for (Index j = 0; j < z.cols(); ++j) zi[j] = xi[j] + yi[j];
  }
}

template <class T>
void sub_to(const BasicRef<T>& z, const BasicConstRef<T>& x, const BasicConstRef<T>& y) {
  for (Index i = 0; i < z.rows(); ++i) {
    const T* xi = x.row(i);
    const T* yi = y.row(i);
    T* zi = z.row(i);
    for (Index j = 0; j < z.cols(); ++j) zi[j] = xi[j] - yi[j];
  }
}

// Square n x n product, Winograd's form of Strassen's recursion.
template <class T>
void strassen_square(const BasicRef<T>& c, const BasicConstRef<T>& a, const BasicConstRef<T>& b, const MmEngine& e) {
  const Index n = a.rows();
  if (n <= e.cutoff || n == 1) {
    conventional(c, a, b, e);
    return;
  }
  if (n % 2 == 1) {
    // Pad with a zero row/column; the extra products contribute exact zeros.
    BasicMatrix<T> ap(n + 1, n + 1), bp(n + 1, n + 1), cp(n + 1, n + 1);
    ap.block(0, 0, n, n).assign(a);
    bp.block(0, 0, n, n).assign(b);
    strassen_square<T>(cp.view(), ap.view(), bp.view(), e);
    c.assign(cp.block(0, 0, n, n));
    return;
  }

  const Index h = n / 2;
  const auto a11 = a.block(0, 0, h, h), a12 = a.block(0, h, h, h);
  const auto a21 = a.block(h, 0, h, h), a22 = a.block(h, h, h, h);
  const auto b11 = b.block(0, 0, h, h), b12 = b.block(0, h, h, h);
  const auto b21 = b.block(h, 0, h, h), b22 = b.block(h, h, h, h);

  BasicMatrix<T> s1(h, h), s2(h, h), s3(h, h), s4(h, h);
  BasicMatrix<T> t1(h, h), t2(h, h), t3(h, h), t4(h, h);
  add_to<T>(s1.view(), a21, a22);
  sub_to<T>(s2.view(), s1.view(), a11);
  sub_to<T>(s3.view(), a11, a21);
  sub_to<T>(s4.view(), a12, s2.view());
  sub_to<T>(t1.view(), b12, b11);
  sub_to<T>(t2.view(), b22, t1.view());
  sub_to<T>(t3.view(), b22, b12);
  sub_to<T>(t4.view(), t2.view(), b21);

  BasicMatrix<T> m1(h, h), m2(h, h), m3(h, h), m4(h, h), m5(h, h), m6(h, h), m7(h, h);
  strassen_square<T>(m1.view(), a11, b11, e);
  strassen_square<T>(m2.view(), a12, b21, e);
  strassen_square<T>(m3.view(), s4.view(), b22, e);
  strassen_square<T>(m4.view(), a22, t4.view(), e);
  strassen_square<T>(m5.view(), s1.view(), t1.view(), e);
  strassen_square<T>(m6.view(), s2.view(), t2.view(), e);
  strassen_square<T>(m7.view(), s3.view(), t3.view(), e);

  const auto c11 = c.block(0, 0, h, h), c12 = c.block(0, h, h, h);
  const auto c21 = c.block(h, 0, h, h), c22 = c.block(h, h, h, h);
  // m6 becomes U2 = M1 + M6, m7 becomes U3 = U2 + M7, m1 is reused for U4.
  add_to<T>(c11, m1.view(), m2.view());
  add_to<T>(m6.view(), m1.view(), m6.view());
  add_to<T>(m7.view(), m6.view(), m7.view());
  add_to<T>(m1.view(), m6.view(), m5.view());
  add_to<T>(c12, m1.view(), m3.view());
  sub_to<T>(c21, m7.view(), m4.view());
  add_to<T>(c22, m7.view(), m5.view());

  const std::uint64_t hh = static_cast<std::uint64_t>(h) * h;
  e.count(0, 15 * hh);
}

// Rectangular product: tile into s x s squares, s the smallest dimension, and
// finish the fringe conventionally.
template <class T>
void strassen_rect(const BasicRef<T>& c, const BasicConstRef<T>& a, const BasicConstRef<T>& b, const MmEngine& e) {
  const Index p = a.rows(), q = a.cols(), r = b.cols();
  const Index s = std::min({p, q, r});
  if (p == s && q == s && r == s) {
    strassen_square(c, a, b, e);
    return;
  }
  const Index p0 = (p / s) * s, q0 = (q / s) * s, r0 = (r / s) * s;
  c.fill(T(0.0));
  BasicMatrix<T> tile(s, s);
  std::uint64_t extra_adds = 0;
  for (Index i = 0; i < p0; i += s)
    for (Index j = 0; j < r0; j += s)
      for (Index k = 0; k < q0; k += s) {
        strassen_square<T>(tile.view(), a.block(i, k, s, s), b.block(k, j, s, s), e);
        auto cij = c.block(i, j, s, s);
        if (k == 0) {
          cij.assign(tile.view());
        } else {
          add_to<T>(cij, cij, tile.view());
          extra_adds += static_cast<std::uint64_t>(s) * s;
        }
      }

  // Fringe: inner-dimension remainder over all of C, then the row and column
  // strips of C not covered by the tiles.
  auto fringe = [&](const BasicRef<T>& cc, const BasicConstRef<T>& aa, const BasicConstRef<T>& bb) {
    if (cc.empty() || aa.cols() == 0) return;
    BasicMatrix<T> t(cc.rows(), cc.cols());
    conventional<T>(t.view(), aa, bb, e);
    add_to<T>(cc, cc, t.view());
    extra_adds += static_cast<std::uint64_t>(cc.rows()) * cc.cols();
  };
  if (q0 < q) fringe(c, a.block(0, q0, p, q - q0), b.block(q0, 0, q - q0, r));
  if (p0 < p) fringe(c.block(p0, 0, p - p0, r), a.block(p0, 0, p - p0, q0), b.block(0, 0, q0, r));
  if (r0 < r) fringe(c.block(0, r0, p0, r - r0), a.block(0, 0, p0, q0), b.block(0, r0, q0, r - r0));
  e.count(0, extra_adds);
}

}  // namespace

template <class T>
BasicMatrix<T> multiply(const BasicConstRef<T>& a, const BasicConstRef<T>& b, const MmEngine& engine) {
  if (a.cols() != b.rows()) {
    throw DimensionError("multiply: inner dimensions differ (" + std::to_string(a.cols()) + " vs " +
                         std::to_string(b.rows()) + ")");
  }
  BasicMatrix<T> c(a.rows(), b.cols());
  switch (engine.kind) {
    case EngineKind::conventional: conventional<T>(c.view(), a, b, engine); break;
    case EngineKind::blocked: blocked<T>(c.view(), a, b, engine); break;
    case EngineKind::strassen:
      if (engine.cutoff < 1) throw InvalidArgument("strassen cutoff must be >= 1");
      strassen_rect<T>(c.view(), a, b, engine);
      break;
  }
  return c;
}

template <class T>
void accumulate(const BasicRef<T>& c, const BasicConstRef<T>& x, int sign, const MmEngine& engine) {
  if (c.rows() != x.rows() || c.cols() != x.cols()) throw DimensionError("accumulate: shape mismatch");
  if (sign >= 0) {
    add_to<T>(c, c, x);
  } else {
    sub_to<T>(c, c, x);
  }
  engine.count(0, static_cast<std::uint64_t>(c.rows()) * c.cols());
}

template <class T>
void multiply_add(const BasicRef<T>& c, const BasicConstRef<T>& a, const BasicConstRef<T>& b, const MmEngine& engine,
                  int sign) {
  if (c.rows() != a.rows() || c.cols() != b.cols()) throw DimensionError("multiply_add: output shape mismatch");
  if (a.cols() == 0 || c.empty()) return;
  const BasicMatrix<T> p = multiply<T>(a, b, engine);
  accumulate<T>(c, p.view(), sign, engine);
}

template BasicMatrix<double> multiply<double>(const BasicConstRef<double>&, const BasicConstRef<double>&,
                                              const MmEngine&);
template BasicMatrix<DoubleWord> multiply<DoubleWord>(const BasicConstRef<DoubleWord>&,
                                                      const BasicConstRef<DoubleWord>&, const MmEngine&);
template void multiply_add<double>(const BasicRef<double>&, const BasicConstRef<double>&,
                                   const BasicConstRef<double>&, const MmEngine&, int);
template void multiply_add<DoubleWord>(const BasicRef<DoubleWord>&, const BasicConstRef<DoubleWord>&,
                                       const BasicConstRef<DoubleWord>&, const MmEngine&, int);
template void accumulate<double>(const BasicRef<double>&, const BasicConstRef<double>&, int, const MmEngine&);
template void accumulate<DoubleWord>(const BasicRef<DoubleWord>&, const BasicConstRef<DoubleWord>&, int,
                                     const MmEngine&);

double mu_bound(const MmEngine& engine, Index n) {
  const double nd = static_cast<double>(std::max<Index>(n, 1));
  if (engine.kind != EngineKind::strassen || n <= engine.cutoff) return nd;
  // Halve until the cutoff is reached to find the leaf size actually used.
  double n0 = nd;
  int levels = 0;
  while (n0 > static_cast<double>(engine.cutoff) && n0 > 1.0) {
    n0 = std::ceil(n0 / 2.0);
    ++levels;
  }
  return std::max(nd, std::pow(18.0, levels) * (n0 * n0 + 6.0 * n0) - 6.0 * nd);
}

double fit_exponent(const std::vector<Index>& sizes, const std::vector<double>& counts) {
  if (sizes.size() < 3) throw InvalidArgument("fit_exponent: need at least 3 sizes");
  if (sizes.size() != counts.size()) throw DimensionError("fit_exponent: sizes and counts differ in length");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] == 0 || (sizes[i] & (sizes[i] - 1)) != 0) throw InvalidArgument("fit_exponent: sizes must be powers of 2");
    if (i > 0 && sizes[i] <= sizes[i - 1]) throw InvalidArgument("fit_exponent: sizes must be strictly increasing");
    if (!(counts[i] > 0.0)) throw InvalidArgument("fit_exponent: counts must be positive");
  }
  const double k = static_cast<double>(sizes.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const double x = std::log2(static_cast<double>(sizes[i]));
    const double y = std::log2(counts[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

namespace {

double mm_error_constant(Index n, const MmEngine& engine, Index trials, RngStream& rng) {
  double worst = 0.0;
  const MmEngine quiet = engine.with_counter(nullptr);
  for (Index t = 0; t < trials; ++t) {
    const Matrix a = gaussian_matrix(n, n, rng);
    const Matrix b = gaussian_matrix(n, n, rng);
    const Matrix c = multiply(a, b, quiet);
    const MatrixDW exact = multiply<DoubleWord>(widen(a).view(), widen(b).view(), MmEngine::conventional());
    DoubleWord ss(0.0);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) {
        const DoubleWord d = DoubleWord(c(i, j)) - exact(i, j);
        ss += d * d;
      }
    const double denom = frobenius_norm(a.view()) * frobenius_norm(b.view()) * kEps;
    if (denom > 0.0) worst = std::max(worst, std::sqrt(ss.to_double()) / denom);
  }
  return worst;
}

}  // namespace

ErrorModel measure_mm_error(Index n, const MmEngine& engine, Index trials, RngStream& rng) {
  if (n < 2) throw InvalidArgument("measure_mm_error: n must be >= 2");
  if (trials < 1) throw InvalidArgument("measure_mm_error: trials must be >= 1");
  ErrorModel m;
  m.observed_constant = mm_error_constant(n, engine, trials, rng);
  m.sizes = {n};
  m.constants = {m.observed_constant};
  m.mu_exponent = m.observed_constant > 1.0 ? std::log(m.observed_constant) / std::log(static_cast<double>(n)) : 0.0;
  return m;
}

ErrorModel measure_mm_error(const std::vector<Index>& sizes, const MmEngine& engine, Index trials, RngStream& rng) {
  ErrorModel m;
  m.sizes = sizes;
  for (Index n : sizes) {
    const double c = measure_mm_error(n, engine, trials, rng).observed_constant;
    m.constants.push_back(c);
    m.observed_constant = std::max(m.observed_constant, c);
  }
  if (sizes.size() >= 3) {
    std::vector<double> pos(m.constants);
    for (double& v : pos) v = std::max(v, 1e-300);
    m.mu_exponent = std::max(0.0, fit_exponent(sizes, pos));
  } else if (!sizes.empty()) {
    m.mu_exponent = m.observed_constant > 1.0
                        ? std::log(m.observed_constant) / std::log(static_cast<double>(sizes.back()))
                        : 0.0;
  }
  return m;
}

}  // namespace fastla
