#pragma once

#include <optional>
#include <vector>

#include "fastla/qr.hpp"
#include "fastla/random.hpp"

namespace fastla {

/// Haar-distributed orthogonal matrix: Q from qrr of a Gaussian matrix with
/// column i multiplied by sign(R_ii).
Matrix haar_orthogonal(Index n, RngStream& rng, const MmEngine& engine = {});

struct UrvResult {
  WYFactor U;
  Matrix R;  // upper triangular
  Matrix V;  // explicit orthogonal, A = U R V
  StabilityReport report;
  RngStream seed;  // stream state used to draw V
};

/// Randomized URV: V Haar, A V^T = U R by qrr.
UrvResult rurv(const ConstMatrixRef& a, RngStream& rng, const MmEngine& engine = {});

struct RankRevealReport {
  Index r = 1;
  double sigma_min_leading = 0.0;   // sigma_min(R(1:r,1:r))
  double sigma_max_trailing = 0.0;  // sigma_max(R(r+1:n,r+1:n))
  std::optional<double> f;          // sigma_min of the leading block of Q^T V^T
  std::optional<bool> f_lower_bound_check;
  std::optional<bool> upper_bound_check;
  std::optional<bool> trailing_bound_check;
  std::optional<double> trailing_bound;
  std::optional<double> gap_ratio;  // sigma_{r+1} / sigma_r
};

/// Diagnostics for a split at r. With the planted spectrum (descending) and
/// right singular basis Q of A = P diag(sigma) Q^T, the leading and trailing
/// block bounds are evaluated as well.
RankRevealReport rank_reveal_report(const UrvResult& u, Index r, const std::vector<double>* sigma = nullptr,
                                    const Matrix* q = nullptr);

/// 3 sigma_{r+1} f^{-4} (sigma_1/sigma_r)^3 / (1 - sigma_{r+1}^2 / (f sigma_r)^2),
/// meaningful when sigma_{r+1} < f sigma_r (infinity otherwise).
double trailing_block_bound(const std::vector<double>& sigma, Index r, double f);

/// Smallest k with sigma_{k+1}(R) <= n eps sigma_1(R) for the R of rurv(a);
/// n when no such k < n.
Index exact_rank_probe(const ConstMatrixRef& a, RngStream& rng, const MmEngine& engine = {});

struct FStatSummary {
  Index n = 0, r = 0, trials = 0;
  std::vector<double> samples;  // sorted ascending
  double median = 0.0;
  double prob_below_a_half = 0.0;  // Pr[f < 1/(r^{1.5} sqrt(n))]
  double prob_below_a_one = 0.0;   // Pr[f < 1/(r^2 sqrt(n))]
};

/// Samples f = sigma_min(V(1:r,1:r)) for Haar V; trial t draws from
/// rng.substream(t), so results do not depend on `threads`.
FStatSummary f_statistic_experiment(Index n, Index r, Index trials, const RngStream& rng, unsigned threads = 1);

}  // namespace fastla
