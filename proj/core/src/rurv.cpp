#include "fastla/rurv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "fastla/oracle.hpp"
#include "fastla/precision.hpp"

namespace fastla {

Matrix haar_orthogonal(Index n, RngStream& rng, const MmEngine& engine) {
  if (n == 0) throw InvalidArgument("haar_orthogonal: n must be positive");
  const Matrix b = gaussian_matrix(n, n, rng);
  QrrConfig cfg;
  cfg.compute_report = false;
  const QrResult f = qrr(b.view(), engine, cfg);
  Matrix q = form_q(f.q);
  for (Index j = 0; j < n; ++j)
    if (f.R(j, j) < 0.0)
      for (Index i = 0; i < n; ++i) q(i, j) = -q(i, j);
  return q;
}

UrvResult rurv(const ConstMatrixRef& a, RngStream& rng, const MmEngine& engine) {
  if (a.rows() != a.cols()) throw DimensionError("rurv: matrix must be square");
  const Index n = a.rows();
  UrvResult out{WYFactor{}, Matrix{}, Matrix{}, StabilityReport{}, rng};
  out.V = haar_orthogonal(n, rng, engine);
  const Matrix vt = out.V.transpose();
  const Matrix ahat = multiply(a, vt.view(), engine);
  QrrConfig cfg;
  cfg.compute_report = false;
  QrResult f = qrr(ahat.view(), engine, cfg);
  out.U = std::move(f.q);
  out.R = std::move(f.R);

  const MmEngine conv = MmEngine::conventional();
  const Matrix ur = apply_q(out.U, out.R.view(), conv);
  const Matrix urv = multiply(ur.view(), out.V.view(), conv);
  const double an = frobenius_norm(a);
  const double d = frobenius_distance(urv.view(), a);
  out.report.residual = an > 0.0 ? d / an : d;
  out.report.orth_defect = std::max(orthogonality_defect(out.V.view()), orthogonality_defect(form_q(out.U).view()));
  return out;
}

double trailing_block_bound(const std::vector<double>& sigma, Index r, double f) {
  if (r == 0 || r >= sigma.size()) throw InvalidArgument("trailing_block_bound: need 1 <= r < n");
  const double s1 = sigma[0], sr = sigma[r - 1], sr1 = sigma[r];
  if (!(sr1 < f * sr)) return std::numeric_limits<double>::infinity();
  const double q = sr1 / (f * sr);
  return 3.0 * sr1 * std::pow(f, -4.0) * std::pow(s1 / sr, 3.0) / (1.0 - q * q);
}

RankRevealReport rank_reveal_report(const UrvResult& u, Index r, const std::vector<double>* sigma, const Matrix* q) {
  const Index n = u.R.rows();
  if (r == 0 || r >= n) throw InvalidArgument("rank_reveal_report: need 1 <= r < n");
  RankRevealReport rep;
  rep.r = r;
  rep.sigma_min_leading = sigma_min(u.R.block(0, 0, r, r));
  rep.sigma_max_trailing = sigma_max(u.R.block(r, r, n - r, n - r));
  if (!sigma) return rep;
  if (sigma->size() != n) throw DimensionError("rank_reveal_report: spectrum length must be n");
  const double sr = (*sigma)[r - 1], sr1 = (*sigma)[r];
  rep.gap_ratio = sr > 0.0 ? sr1 / sr : std::numeric_limits<double>::infinity();
  constexpr double slack = 1e-6;
  rep.upper_bound_check = rep.sigma_min_leading <= std::hypot(sr, sr1) * (1 + slack);
  if (!q) return rep;
  // X = Q^T V^T; f is the smallest singular value of its leading r x r block.
  const Matrix x = multiply(q->transpose().view(), u.V.transpose().view(), MmEngine::conventional());
  rep.f = sigma_min(x.block(0, 0, r, r));
  rep.f_lower_bound_check = rep.sigma_min_leading >= *rep.f * sr * (1 - slack);
  if (sr1 < *rep.f * sr) {
    rep.trailing_bound = trailing_block_bound(*sigma, r, *rep.f);
    rep.trailing_bound_check =
        rep.sigma_max_trailing >= sr1 * (1 - slack) && rep.sigma_max_trailing <= *rep.trailing_bound;
  }
  return rep;
}

Index exact_rank_probe(const ConstMatrixRef& a, RngStream& rng, const MmEngine& engine) {
  const UrvResult u = rurv(a, rng, engine);
  const Index n = u.R.rows();
  const std::vector<double> s = singular_values(u.R.view());
  const double tol = static_cast<double>(n) * kEps * s[0];
  for (Index k = 0; k < n; ++k)
    if (s[k] <= tol) return k;
  return n;
}

FStatSummary f_statistic_experiment(Index n, Index r, Index trials, const RngStream& rng, unsigned threads) {
  if (r == 0 || r >= n) throw InvalidArgument("f_statistic_experiment: need 1 <= r < n");
  if (trials == 0) throw InvalidArgument("f_statistic_experiment: trials must be positive");
  FStatSummary s{n, r, trials, std::vector<double>(trials), 0.0, 0.0, 0.0};
  auto run = [&](Index t) {
    RngStream sub = rng.substream(t);
    const Matrix v = haar_orthogonal(n, sub);
    s.samples[t] = sigma_min(v.block(0, 0, r, r));
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(trials)));
  if (threads == 1) {
    for (Index t = 0; t < trials; ++t) run(t);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        for (Index t = w; t < trials; t += threads) run(t);
      });
    for (auto& th : pool) th.join();
  }
  std::sort(s.samples.begin(), s.samples.end());
  s.median = trials % 2 ? s.samples[trials / 2] : 0.5 * (s.samples[trials / 2 - 1] + s.samples[trials / 2]);
  const double rd = static_cast<double>(r), sq = std::sqrt(static_cast<double>(n));
  const double t_half = 1.0 / (std::pow(rd, 1.5) * sq), t_one = 1.0 / (rd * rd * sq);
  auto frac = [&](double thr) {
    return static_cast<double>(std::lower_bound(s.samples.begin(), s.samples.end(), thr) - s.samples.begin()) /
           static_cast<double>(trials);
  };
  s.prob_below_a_half = frac(t_half);
  s.prob_below_a_one = frac(t_one);
  return s;
}

}  // namespace fastla
