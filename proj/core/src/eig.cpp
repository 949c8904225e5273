#include "fastla/eig.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "fastla/inverse.hpp"
#include "fastla/lu.hpp"
#include "fastla/oracle.hpp"
#include "fastla/precision.hpp"
#include "fastla/rurv.hpp"
#include "fastla/sylvester.hpp"

namespace fastla {

namespace {

Matrix invert_for_sign(const Matrix& x, SignInverter kind, const MmEngine& engine, int iter) {
  Matrix xi;
  try {
    if (kind == SignInverter::lu) xi = solve_linear(x.view(), Matrix::identity(x.rows()).view(), engine);
    else xi = gen_inv(x.view(), engine, Precision::working, false).X;
  } catch (const SingularMatrixError&) {
    throw ConvergenceError("sign_function: singular iterate (eigenvalue on the splitting line?)", iter);
  }
  for (double v : xi.values())
    if (!std::isfinite(v)) throw ConvergenceError("sign_function: non-finite iterate", iter);
  return xi;
}

void symmetrize(Matrix& x) {
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = i + 1; j < x.cols(); ++j) {
      const double m = 0.5 * (x(i, j) + x(j, i));
      x(i, j) = m;
      x(j, i) = m;
    }
}

double log_abs_det(const Matrix& x, const MmEngine& engine, int iter) {
  LurConfig cfg;
  cfg.compute_report = false;
  const LuResult f = lur(x.view(), engine, cfg);
  if (f.singular()) throw ConvergenceError("sign_function: singular iterate", iter);
  double s = 0.0;
  for (Index i = 0; i < f.U.rows(); ++i) s += std::log(std::fabs(f.U(i, i)));
  return s;
}

}  // namespace

SignResult sign_function(const ConstMatrixRef& a, const SignIterConfig& cfg, const MmEngine& engine) {
  if (a.rows() != a.cols()) throw DimensionError("sign_function: matrix must be square");
  if (cfg.max_iters < 1 || !(cfg.conv_tol > 0.0)) throw InvalidArgument("sign_function: bad iteration config");
  const Index n = a.rows();
  SignResult out;
  Matrix x(a);
  bool polishing = false;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    if (cfg.scaling == SignScaling::determinantal && !polishing) {
      const double mu = std::exp(-log_abs_det(x, engine, it) / static_cast<double>(n));
      x = scaled(x.view(), mu);
    }
    const Matrix xi = invert_for_sign(x, cfg.inverter, engine, it);
    out.kappa_iter = std::max(out.kappa_iter, one_norm(x.view()) * one_norm(xi.view()));
    Matrix next(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) next(i, j) = 0.5 * (x(i, j) + xi(i, j));
    const double step = frobenius_distance(next.view(), x.view()) > 0.0
                            ? one_norm(subtract<double>(next.view(), x.view()).view()) / one_norm(x.view())
                            : 0.0;
    x = std::move(next);
    out.iterations = it;
    if (polishing) break;
    // Quadratic convergence: one more step after the threshold takes the
    // error from sqrt(eps) to roughly eps.
    if (step <= cfg.conv_tol) {
      polishing = true;
      if (it == cfg.max_iters) break;
    } else if (it == cfg.max_iters) {
      throw ConvergenceError("sign_function: no convergence within max_iters", it);
    }
  }
  out.S = std::move(x);
  return out;
}

Moebius::Moebius(double a, double b, double c, double d) : alpha(a), beta(b), gamma(c), delta(d) {
  if (alpha * delta - beta * gamma == 0.0) throw InvalidArgument("moebius: alpha delta - beta gamma must be nonzero");
}

Moebius Moebius::line(double c) { return {1.0, -c, 0.0, 1.0}; }

Moebius Moebius::disk(double center, double radius) {
  if (!(radius > 0.0)) throw InvalidArgument("moebius: disk radius must be positive");
  // z -> (rho + (z - c)) / (rho - (z - c)).
  return {1.0, radius - center, -1.0, radius + center};
}

Matrix Moebius::apply(const ConstMatrixRef& a, const MmEngine& engine) const {
  const Index n = a.rows();
  Matrix num(n, n), den(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      num(i, j) = alpha * a(i, j) + (i == j ? beta : 0.0);
      den(i, j) = gamma * a(i, j) + (i == j ? delta : 0.0);
    }
  if (gamma == 0.0) return scaled(num.view(), 1.0 / delta);
  // num and den commute, so den^{-1} num is the same matrix.
  return solve_linear(den.view(), num.view(), engine);
}

Moebius SplitRegion::moebius() const {
  switch (kind) {
    case Kind::half_plane: return Moebius::line(a);
    case Kind::disk: return Moebius::disk(a, b);
    case Kind::real_interval: return Moebius::disk(0.5 * (a + b), 0.5 * (b - a));
  }
  return Moebius::line(a);
}

std::string SplitRegion::describe() const {
  std::ostringstream os;
  os.precision(6);
  switch (kind) {
    case Kind::half_plane: os << "half-plane re>" << a; break;
    case Kind::disk: os << "disk c=" << a << " r=" << b; break;
    case Kind::real_interval: os << "interval [" << a << "," << b << "]"; break;
  }
  return os.str();
}

std::vector<double> norm_a21_profile(const ConstMatrixRef& a) {
  const Index n = a.rows();
  if (n < 2 || a.cols() != n) throw DimensionError("norm_a21_profile: need a square matrix with n >= 2");
  std::vector<double> col(n, 0.0), row(n, 0.0);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) col[i] += std::fabs(a(j, i));
    for (Index k = 0; k < i; ++k) row[i] += std::fabs(a(i, k));
  }
  std::vector<double> out(n - 1);
  out[0] = col[0];
  for (Index i = 1; i + 1 < n; ++i) out[i] = out[i - 1] + col[i] - row[i];
  return out;
}

SplitResult split_once(const ConstMatrixRef& a, const SplitRegion& region, RngStream& rng, const MmEngine& engine,
                       const SplitConfig& cfg) {
  const Index n = a.rows();
  if (n < 2 || a.cols() != n) throw DimensionError("split_once: need a square matrix with n >= 2");
  const double tol = cfg.split_tol > 0.0 ? cfg.split_tol : 1e3 * static_cast<double>(n) * kEps;
  SplitResult out{Matrix::identity(n), 0, Matrix(a), false, 0.0, 0, 0, false, std::nullopt};

  SignResult s;
  try {
    const Matrix m = region.moebius().apply(a, engine);
    s = sign_function(m.view(), cfg.sign, engine);
  } catch (const SingularMatrixError&) {
    out.sign_failed = true;
    return out;
  } catch (const ConvergenceError& e) {
    out.sign_failed = true;
    out.sign_iterations = e.iterations();
    return out;
  }
  out.sign_iterations = s.iterations;

  Matrix p(n, n);
  double trace = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) p(i, j) = 0.5 * (s.S(i, j) + (i == j ? 1.0 : 0.0));
  for (Index i = 0; i < n; ++i) trace += p(i, i);
  if (cfg.symmetric) symmetrize(p);
  // trace(P) counts the eigenvalues inside the region; nothing to split when
  // it rounds to 0 or n.
  const double count = std::round(trace);
  out.inside = static_cast<Index>(std::clamp(count, 0.0, static_cast<double>(n)));
  if (count < 0.5 || count > static_cast<double>(n) - 0.5) return out;

  const double anorm = sum_norm(a);
  double best = std::numeric_limits<double>::infinity();
  for (int attempt = 1; attempt <= cfg.max_attempts; ++attempt) {
    out.attempts = attempt;
    const UrvResult u = rurv(p.view(), rng, engine);
    const Matrix q = form_q(u.U);
    const Matrix aq = multiply(a, q.view(), engine);
    Matrix ahat = multiply(q.transpose().view(), aq.view(), engine);
    if (cfg.symmetric) symmetrize(ahat);
    const std::vector<double> prof = norm_a21_profile(ahat.view());
    const Index r = static_cast<Index>(std::min_element(prof.begin(), prof.end()) - prof.begin()) + 1;
    if (prof[r - 1] < best) {
      best = prof[r - 1];
      out.Q = q;
      out.Ahat = std::move(ahat);
      out.r = r;
      out.norm_a21 = best;
    }
    if (best <= tol * anorm) {
      out.accepted = true;
      break;
    }
  }
  return out;
}

Index SchurResult::accepted_splits() const {
  return static_cast<Index>(std::count_if(tree.begin(), tree.end(), [](const SplitNode& s) { return s.accepted; }));
}

Rect gershgorin_rectangle(const ConstMatrixRef& a) {
  if (a.rows() != a.cols()) throw DimensionError("gershgorin_rectangle: matrix must be square");
  Rect r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), 0.0, 0.0};
  for (Index i = 0; i < a.rows(); ++i) {
    double rad = 0.0;
    for (Index j = 0; j < a.cols(); ++j)
      if (j != i) rad += std::fabs(a(i, j));
    r.re_lo = std::min(r.re_lo, a(i, i) - rad);
    r.re_hi = std::max(r.re_hi, a(i, i) + rad);
    r.im_hi = std::max(r.im_hi, rad);
  }
  r.im_lo = -r.im_hi;
  return r;
}

namespace {

struct SchurWork {
  Matrix T, Q;
  const MmEngine& engine;
  bool symmetric;
  SchurResult& res;

  // Replaces the diagonal block [lo, hi) by Qs^T T Qs and propagates Qs.
  void apply(Index lo, Index hi, const Matrix& qs, const Matrix& block) {
    const Index n = T.rows(), nb = hi - lo;
    T.block(lo, lo, nb, nb).assign(block.view());
    if (!symmetric) {
      if (lo > 0) {
        const Matrix top = multiply(T.block(0, lo, lo, nb), qs.view(), engine);
        T.block(0, lo, lo, nb).assign(top.view());
      }
      if (hi < n) {
        const Matrix right = multiply(qs.transpose().view(), T.block(lo, hi, nb, n - hi), engine);
        T.block(lo, hi, nb, n - hi).assign(right.view());
      }
    }
    const Matrix qcols = multiply(Q.block(0, lo, n, nb), qs.view(), engine);
    Q.block(0, lo, n, nb).assign(qcols.view());
  }

  void standardize_2x2(Index lo) {
    const double a = T(lo, lo), b = T(lo, lo + 1), c = T(lo + 1, lo), d = T(lo + 1, lo + 1);
    if (c == 0.0 && (!symmetric || b == 0.0)) return;
    const double p = 0.5 * (a + d), h = 0.5 * (a - d);
    const double disc = h * h + b * c;
    SplitNode node{lo, 2, 1, "base-2x2", std::fabs(c), 0, 0, false};
    if (disc < 0.0) {
      node.region = "complex-pair";
      res.tree.push_back(node);
      return;
    }
    // Eigenvalue farther from d keeps (lambda - d, c) well away from zero.
    const double lambda = h >= 0.0 ? p + std::sqrt(disc) : p - std::sqrt(disc);
    double v1 = lambda - d, v2 = c;
    if (std::hypot(b, lambda - a) > std::hypot(v1, v2)) {
      v1 = b;
      v2 = lambda - a;
    }
    const double nv = std::hypot(v1, v2);
    if (nv == 0.0) return;
    const double cs = v1 / nv, sn = v2 / nv;
    Matrix g = Matrix::from_rows({{cs, -sn}, {sn, cs}});
    Matrix blk(T.block(lo, lo, 2, 2));
    blk = multiply(g.transpose().view(), multiply(blk.view(), g.view(), MmEngine::conventional()).view(),
                   MmEngine::conventional());
    node.norm_a21 = std::fabs(blk(1, 0));
    blk(1, 0) = 0.0;
    if (symmetric) blk(0, 1) = 0.0;
    node.accepted = true;
    apply(lo, lo + 2, g, blk);
    res.tree.push_back(node);
  }
};

std::vector<SplitRegion> candidate_regions(const Rect& rect, bool symmetric, int max_candidates) {
  const double w = rect.re_hi - rect.re_lo;
  const double off = 0.0123 * w;
  const double fracs[] = {0.5, 0.25, 0.75, 0.375, 0.625, 0.125, 0.875, 0.4375, 0.5625, 0.3125, 0.6875, 0.1875};
  std::vector<SplitRegion> out;
  auto line = [&](double f) {
    const double c = rect.re_lo + f * w + off;
    if (symmetric) out.push_back(SplitRegion::interval(rect.re_lo - 0.5 * w - 1.0, c));
    else out.push_back(SplitRegion::half_plane(c));
  };
  const double reach = std::max({std::fabs(rect.re_lo), std::fabs(rect.re_hi), rect.im_hi});
  auto disk = [&](double f) { out.push_back(SplitRegion::disk(0.0, f * reach + 0.0077 * reach)); };
  const bool complex_possible = !symmetric && rect.im_hi > 0.0;
  line(0.5);
  if (complex_possible) disk(0.5);
  line(0.25);
  line(0.75);
  if (complex_possible) {
    disk(0.25);
    disk(0.75);
  }
  for (std::size_t k = 3; k < std::size(fracs); ++k) line(fracs[k]);
  if (out.size() > static_cast<std::size_t>(max_candidates)) out.resize(max_candidates);
  return out;
}

double offdiag_frobenius(const ConstMatrixRef& b) {
  double s = 0.0;
  for (Index i = 0; i < b.rows(); ++i)
    for (Index j = 0; j < b.cols(); ++j)
      if (i != j) s += b(i, j) * b(i, j);
  return std::sqrt(s);
}

SchurResult run_dandc(const ConstMatrixRef& a, RngStream& rng, const MmEngine& engine, const SchurConfig& cfg,
                      bool symmetric) {
  if (a.rows() != a.cols()) throw DimensionError("schur_dandc: matrix must be square");
  const Index n = a.rows();
  SchurResult res;
  res.split_tol = cfg.split.split_tol > 0.0 ? cfg.split.split_tol : 1e3 * static_cast<double>(n) * kEps;
  SchurWork w{Matrix(a), Matrix::identity(n), engine, symmetric, res};
  const double anorm_s = sum_norm(a), anorm_f = frobenius_norm(a);
  const double diag_tol = 10.0 * static_cast<double>(n) * kEps * anorm_f;

  std::vector<std::pair<Index, Index>> stack = {{0, n}};
  while (!stack.empty()) {
    const auto [lo, hi] = stack.back();
    stack.pop_back();
    const Index nb = hi - lo;
    if (nb <= 1) continue;
    const ConstMatrixRef blk = w.T.block(lo, lo, nb, nb);
    if (symmetric) {
      if (offdiag_frobenius(blk) <= diag_tol) {
        for (Index i = lo; i < hi; ++i)
          for (Index j = lo; j < hi; ++j)
            if (i != j) w.T(i, j) = 0.0;
        continue;
      }
    } else if (is_upper_triangular(blk)) {
      continue;
    }
    if (nb == 2) {
      w.standardize_2x2(lo);
      continue;
    }

    double mu = 0.0;
    for (Index i = 0; i < nb; ++i) mu += blk(i, i);
    mu /= static_cast<double>(nb);
    Matrix bs(blk);
    for (Index i = 0; i < nb; ++i) bs(i, i) -= mu;
    const double s = frobenius_norm(bs.view());
    const Matrix bt = scaled(bs.view(), 1.0 / s);
    const Rect rect = gershgorin_rectangle(bt.view());
    const double perimeter = 2.0 * ((rect.re_hi - rect.re_lo) + (rect.im_hi - rect.im_lo));

    bool done = false;
    if (s * perimeter >= std::sqrt(kEps) * anorm_f) {
      SplitConfig scfg = cfg.split;
      scfg.symmetric = symmetric;
      scfg.split_tol = res.split_tol;
      // Returns the eigenvalue count inside the region, empty if the sign
      // iteration failed; commits the split when it is accepted.
      auto attempt = [&](const SplitRegion& region) -> std::optional<Index> {
        const SplitResult sr = split_once(bt.view(), region, rng, engine, scfg);
        if (!sr.accepted || s * sr.norm_a21 > res.split_tol * anorm_s) return sr.inside;
        Matrix nbk = scaled(sr.Ahat.view(), s);
        for (Index i = 0; i < nb; ++i) nbk(i, i) += mu;
        for (Index i = sr.r; i < nb; ++i)
          for (Index j = 0; j < sr.r; ++j) nbk(i, j) = 0.0;
        if (symmetric)
          for (Index i = 0; i < sr.r; ++i)
            for (Index j = sr.r; j < nb; ++j) nbk(i, j) = 0.0;
        w.apply(lo, hi, sr.Q, nbk);
        res.tree.push_back({lo, nb, sr.r, region.describe(), s * sr.norm_a21, sr.attempts, sr.sign_iterations, true});
        stack.push_back({lo + sr.r, hi});
        stack.push_back({lo, lo + sr.r});
        done = true;
        return sr.inside;
      };
      for (const SplitRegion& region : candidate_regions(rect, symmetric, cfg.max_candidates)) {
        attempt(region);
        if (done) break;
      }

      // The fixed grid can fall between closely spaced eigenvalues. Bisect on
      // the region parameter, steering by the eigenvalue count, until the
      // boundary lands in a gap.
      // `grows` says whether the count increases with the parameter.
      auto bisect = [&](double a, double b, bool grows, auto make) {
        for (int it = 0; it < cfg.bisection_steps && !done; ++it) {
          const double mid = 0.5 * (a + b);
          std::optional<Index> k = attempt(make(mid));
          if (done) return;
          if (!k) k = attempt(make(mid + 1e-3 * (b - a)));  // boundary hit an eigenvalue
          if (done || !k) return;
          if (*k > 0 && *k < nb) return;  // in a gap yet not accepted: ill-conditioned split
          if ((*k == 0) == grows) a = mid;
          else b = mid;
        }
      };
      const double pad = 0.01 * (rect.re_hi - rect.re_lo) + kEps;
      if (!done) {
        if (symmetric) {
          const double left = rect.re_lo - 1.0;
          bisect(rect.re_lo - pad, rect.re_hi + pad, true, [&](double c) { return SplitRegion::interval(left, c); });
        } else {
          bisect(rect.re_lo - pad, rect.re_hi + pad, false, [](double c) { return SplitRegion::half_plane(c); });
        }
      }
      if (!done && !symmetric && rect.im_hi > 0.0) {
        const double reach = std::max({std::fabs(rect.re_lo), std::fabs(rect.re_hi), rect.im_hi});
        bisect(0.0, 1.5 * reach, true, [](double rho) { return SplitRegion::disk(0.0, rho); });
      }
    }
    if (done) continue;

    if (symmetric) {
      // Cluster: the block is numerically a multiple of I plus noise below
      // the split resolution; finish it with Jacobi rotations.
      const EighResult e = jacobi_eigh(blk);
      Matrix diag(nb, nb);
      for (Index i = 0; i < nb; ++i) diag(i, i) = e.values[i];
      w.apply(lo, hi, e.vectors, diag);
      res.tree.push_back({lo, nb, 0, "cluster-jacobi", 0.0, 0, 0, false});
      if (std::find(res.flags.begin(), res.flags.end(), "cluster-jacobi") == res.flags.end())
        res.flags.push_back("cluster-jacobi");
    } else {
      res.tree.push_back({lo, nb, 0, "cluster", 0.0, 0, 0, false});
      if (std::find(res.flags.begin(), res.flags.end(), "cluster") == res.flags.end()) res.flags.push_back("cluster");
    }
  }
  res.Q = std::move(w.Q);
  res.T = std::move(w.T);
  return res;
}

}  // namespace

SchurResult schur_dandc(const ConstMatrixRef& a, RngStream& rng, const MmEngine& engine, const SchurConfig& cfg) {
  return run_dandc(a, rng, engine, cfg, false);
}

std::vector<std::complex<double>> schur_eigenvalues(const ConstMatrixRef& t) {
  const Index n = t.rows();
  std::vector<std::complex<double>> ev;
  Index i = 0;
  while (i < n) {
    // Extent of the diagonal block starting at i.
    Index j = i + 1;
    for (Index k = i; k < j && k < n; ++k)
      for (Index r = n; r-- > j;)
        if (t(r, k) != 0.0) {
          j = r + 1;
          break;
        }
    const Index nb = j - i;
    if (nb == 1) {
      ev.emplace_back(t(i, i), 0.0);
    } else if (nb == 2) {
      const double p = 0.5 * (t(i, i) + t(i + 1, i + 1));
      const double det = t(i, i) * t(i + 1, i + 1) - t(i, i + 1) * t(i + 1, i);
      const std::complex<double> disc = std::sqrt(std::complex<double>(p * p - det));
      ev.push_back(p + disc);
      ev.push_back(p - disc);
    } else {
      const ConstMatrixRef b = t.block(i, i, nb, nb);
      bool sym = true;
      for (Index r = 0; r < nb && sym; ++r)
        for (Index c = r + 1; c < nb; ++c)
          if (b(r, c) != b(c, r)) {
            sym = false;
            break;
          }
      if (sym) {
        for (double v : jacobi_eigh(b).values) ev.emplace_back(v, 0.0);
      } else {
        double tr = 0.0;
        for (Index r = 0; r < nb; ++r) tr += b(r, r);
        for (Index r = 0; r < nb; ++r) ev.emplace_back(tr / static_cast<double>(nb), 0.0);
      }
    }
    i = j;
  }
  return ev;
}

SymEigResult symmetric_eig(const ConstMatrixRef& a, RngStream& rng, const MmEngine& engine, const SchurConfig& cfg) {
  if (a.rows() != a.cols()) throw DimensionError("symmetric_eig: matrix must be square");
  double asym = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = i + 1; j < a.cols(); ++j) asym += 2.0 * (a(i, j) - a(j, i)) * (a(i, j) - a(j, i));
  if (std::sqrt(asym) > 1e-12 * frobenius_norm(a)) throw InvalidArgument("symmetric_eig: matrix is not symmetric");
  Matrix sym(a);
  symmetrize(sym);
  const SchurResult s = run_dandc(sym.view(), rng, engine, cfg, true);
  const Index n = a.rows();
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) { return s.T(x, x) < s.T(y, y); });
  SymEigResult out{Matrix(n, n), std::vector<double>(n), s.tree, s.flags};
  for (Index k = 0; k < n; ++k) {
    out.values[k] = s.T(order[k], order[k]);
    for (Index i = 0; i < n; ++i) out.Q(i, k) = s.Q(i, order[k]);
  }
  return out;
}

namespace {

// Scaled Newton iteration for the orthogonal polar factor of a nonsingular
// square matrix.
Matrix polar_factor(const Matrix& m, const MmEngine& engine) {
  Matrix x(m);
  const Index n = m.rows();
  for (int it = 0; it < 100; ++it) {
    const Matrix xi = solve_linear(x.view(), Matrix::identity(n).view(), engine);
    const double g = std::pow(one_norm(xi.view()) * inf_norm(xi.view()) / (one_norm(x.view()) * inf_norm(x.view())),
                              0.25);
    Matrix next(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) next(i, j) = 0.5 * (g * x(i, j) + xi(j, i) / g);
    const double step = frobenius_distance(next.view(), x.view());
    x = std::move(next);
    if (step <= 1e-14 * frobenius_norm(x.view())) return x;
  }
  throw ConvergenceError("polar_factor: no convergence", 100);
}

}  // namespace

GramSvdResult svd_via_gram(const ConstMatrixRef& a, RngStream& rng, const MmEngine& engine, const SchurConfig& cfg) {
  if (a.rows() != a.cols()) throw DimensionError("svd_via_gram: matrix must be square");
  const Index n = a.rows();
  const Matrix at = transpose(a);
  Matrix gl = narrow(dw_multiply(a, at.view()).view());
  Matrix gr = narrow(dw_multiply(at.view(), a).view());
  symmetrize(gl);
  symmetrize(gr);
  const SymEigResult el = symmetric_eig(gl.view(), rng, engine, cfg);
  const SymEigResult er = symmetric_eig(gr.view(), rng, engine, cfg);

  GramSvdResult out{Matrix(n, n), Matrix(n, n), std::vector<double>(n), {}};
  for (Index k = 0; k < n; ++k)
    for (Index i = 0; i < n; ++i) {
      out.U(i, k) = el.Q(i, n - 1 - k);
      out.V(i, k) = er.Q(i, n - 1 - k);
    }
  for (const auto& f : el.flags) out.flags.push_back(f);

  const Matrix m = multiply(out.U.transpose().view(), multiply(a, out.V.view(), engine).view(), engine);
  // Indices coupled through an entry above the roundoff level belong to one
  // block; every other off-diagonal entry is dropped.
  const double tol = 10.0 * kEps * frobenius_norm(a);
  std::vector<Index> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](Index x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (i != j && std::fabs(m(i, j)) > tol) parent[find(i)] = find(j);
  std::vector<std::vector<Index>> groups(n);
  for (Index i = 0; i < n; ++i) groups[find(i)].push_back(i);

  for (const auto& g : groups) {
    if (g.empty()) continue;
    if (g.size() == 1) {
      const Index i = g[0];
      out.s[i] = std::fabs(m(i, i));
      if (m(i, i) < 0.0)
        for (Index r = 0; r < n; ++r) out.U(r, i) = -out.U(r, i);
      continue;
    }
    const Index k = g.size();
    Matrix mb(k, k);
    for (Index x = 0; x < k; ++x)
      for (Index y = 0; y < k; ++y) mb(x, y) = m(g[x], g[y]);
    Matrix left, right;
    std::vector<double> sv(k);
    try {
      const Matrix w = polar_factor(mb, engine);
      Matrix h = multiply(w.transpose().view(), mb.view(), MmEngine::conventional());
      symmetrize(h);
      const SymEigResult eh = symmetric_eig(h.view(), rng, engine, cfg);
      right = eh.Q;
      left = multiply(w.view(), eh.Q.view(), MmEngine::conventional());
      for (Index x = 0; x < k; ++x) sv[x] = eh.values[x];
      if (std::find(out.flags.begin(), out.flags.end(), "sigma-cluster") == out.flags.end())
        out.flags.push_back("sigma-cluster");
    } catch (const Error&) {
      const SvdResult js = jacobi_svd(mb.view());
      left = js.U;
      right = js.V;
      sv = js.s;
      if (std::find(out.flags.begin(), out.flags.end(), "cluster-jacobi") == out.flags.end())
        out.flags.push_back("cluster-jacobi");
    }
    Matrix ug(n, k), vg(n, k);
    for (Index r = 0; r < n; ++r)
      for (Index x = 0; x < k; ++x) {
        ug(r, x) = out.U(r, g[x]);
        vg(r, x) = out.V(r, g[x]);
      }
    const Matrix un = multiply(ug.view(), left.view(), MmEngine::conventional());
    const Matrix vn = multiply(vg.view(), right.view(), MmEngine::conventional());
    for (Index x = 0; x < k; ++x) {
      out.s[g[x]] = std::max(sv[x], 0.0);
      for (Index r = 0; r < n; ++r) {
        out.U(r, g[x]) = un(r, x);
        out.V(r, g[x]) = vn(r, x);
      }
    }
  }

  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) { return out.s[x] > out.s[y]; });
  GramSvdResult sorted{Matrix(n, n), Matrix(n, n), std::vector<double>(n), out.flags};
  for (Index k = 0; k < n; ++k) {
    sorted.s[k] = out.s[order[k]];
    for (Index r = 0; r < n; ++r) {
      sorted.U(r, k) = out.U(r, order[k]);
      sorted.V(r, k) = out.V(r, order[k]);
    }
  }
  return sorted;
}

namespace {

bool atomic_block(const ConstMatrixRef& t) { return t.rows() == 1 || (t.rows() == 2 && t(1, 0) != 0.0); }

void evecr_rec(const ConstMatrixRef& t, const MatrixRef& v, const MmEngine& engine, const EvecConfig& cfg,
               double& s_floor) {
  const Index n = t.rows();
  if (atomic_block(t)) {
    v.fill(0.0);
    for (Index i = 0; i < n; ++i) v(i, i) = 1.0;
    return;
  }
  Index h = n / 2;
  if (t(h, h - 1) != 0.0) ++h;
  const Index k = n - h;
  const ConstMatrixRef a = t.block(0, 0, h, h), b = t.block(h, h, k, k), c = t.block(0, h, h, k);
  const Matrix r = sylr(a, b, c, engine).R;
  if (cfg.compute_sep) s_floor = std::min(s_floor, sep_estimate(a, b).value);
  evecr_rec(a, v.block(0, 0, h, h), engine, cfg, s_floor);
  evecr_rec(b, v.block(h, h, k, k), engine, cfg, s_floor);
  v.block(h, 0, k, h).fill(0.0);
  const Matrix rvb = multiply(r.view(), ConstMatrixRef(v.block(h, h, k, k)), engine);
  v.block(0, h, h, k).assign(rvb.view());
  for (Index j = h; j < n; ++j) {
    double s = 0.0;
    for (Index i = 0; i < n; ++i) s += v(i, j) * v(i, j);
    const double inv = 1.0 / std::sqrt(s);
    for (Index i = 0; i < n; ++i) v(i, j) *= inv;
  }
  engine.count(n * k + k, n * k);
}

}  // namespace

EvecResult evecr(const ConstMatrixRef& t, const MmEngine& engine, const EvecConfig& cfg) {
  if (!is_quasi_upper_triangular(t)) throw InvalidArgument("evecr: T must be upper quasi-triangular");
  const Index n = t.rows();
  EvecResult out{Matrix(n, n), {}};
  double s_floor = std::numeric_limits<double>::infinity();
  evecr_rec(t, out.V.view(), engine, cfg, s_floor);
  if (!cfg.compute_sep) {
    out.err.s_floor = 0.0;
    out.err.predicted_evec_bound = std::numeric_limits<double>::infinity();
    return out;
  }
  if (std::isinf(s_floor)) {
    // No split was needed (n <= 2 or a single bump).
    out.err.s_floor = std::numeric_limits<double>::infinity();
    out.err.predicted_evec_bound = std::pow(static_cast<double>(n), cfg.c_prime) * kEps;
    return out;
  }
  out.err.s_floor = s_floor;
  const double ratio = frobenius_norm(t) / s_floor;
  out.err.predicted_evec_bound =
      std::pow(static_cast<double>(n), cfg.c_prime) * kEps * std::pow(ratio, 2.0 + std::log2(static_cast<double>(n)));
  return out;
}

std::vector<double> evec_residuals(const ConstMatrixRef& t, const ConstMatrixRef& v) {
  const Index n = t.rows();
  const Matrix tv = multiply(t, v, MmEngine::conventional());
  std::vector<double> res(n, 0.0);
  for (Index i = 0; i < n;) {
    if (i + 1 < n && t(i + 1, i) != 0.0) {
      // Best 2x2 M with T Vp ~ Vp M, from the normal equations.
      double g[2][2] = {}, h[2][2] = {};
      for (Index r = 0; r < n; ++r)
        for (Index x = 0; x < 2; ++x)
          for (Index y = 0; y < 2; ++y) {
            g[x][y] += v(r, i + x) * v(r, i + y);
            h[x][y] += v(r, i + x) * tv(r, i + y);
          }
      const double det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
      double m[2][2];
      for (Index y = 0; y < 2; ++y) {
        m[0][y] = (g[1][1] * h[0][y] - g[0][1] * h[1][y]) / det;
        m[1][y] = (g[0][0] * h[1][y] - g[1][0] * h[0][y]) / det;
      }
      double s = 0.0;
      for (Index r = 0; r < n; ++r)
        for (Index y = 0; y < 2; ++y) {
          const double d = tv(r, i + y) - v(r, i) * m[0][y] - v(r, i + 1) * m[1][y];
          s += d * d;
        }
      res[i] = res[i + 1] = std::sqrt(s);
      i += 2;
    } else {
      double s = 0.0;
      for (Index r = 0; r < n; ++r) {
        const double d = tv(r, i) - t(i, i) * v(r, i);
        s += d * d;
      }
      res[i] = std::sqrt(s);
      ++i;
    }
  }
  return res;
}

Matrix conventional_eigenvectors(const ConstMatrixRef& t) {
  if (!is_upper_triangular(t) || t.rows() != t.cols())
    throw InvalidArgument("conventional_eigenvectors: T must be upper triangular");
  const Index n = t.rows();
  Matrix v(n, n);
  for (Index i = 0; i < n; ++i) {
    v(i, i) = 1.0;
    for (Index k = i; k-- > 0;) {
      double s = 0.0;
      for (Index l = k + 1; l <= i; ++l) s += t(k, l) * v(l, i);
      const double d = t(k, k) - t(i, i);
      if (d == 0.0) throw SingularMatrixError("conventional_eigenvectors: repeated eigenvalue", k);
      v(k, i) = -s / d;
    }
    double nrm = 0.0;
    for (Index k = 0; k <= i; ++k) nrm += v(k, i) * v(k, i);
    nrm = std::sqrt(nrm);
    for (Index k = 0; k <= i; ++k) v(k, i) /= nrm;
  }
  return v;
}

}  // namespace fastla
