#pragma once

#include <functional>
#include <vector>

#include "fastla/baseline.hpp"
#include "fastla/report.hpp"

namespace fastla {

enum class StepB { solve, invert_multiply };

std::string to_string(StepB s);
StepB parse_step_b(const std::string& s);  // "solve" | "invert" | "invert-multiply"

struct LurConfig {
  /// Panels with at most this many columns are factored by plain partial
  /// pivoting. 1 recurses to single columns.
  Index panel_cutoff = 8;
  StepB step_b = StepB::solve;
  /// Flag threshold for the condition estimate of the L11 blocks.
  double l_cond_threshold = 1e3;
  bool compute_report = true;
};

struct LuResult : LuFactors {
  StabilityReport report;
  double l_cond = 1.0;        // max 1-norm condition estimate of the L11 blocks
  std::vector<Index> pivots;  // LAPACK-style: row k was swapped with pivots[k]
};

/// Recursive LU with partial pivoting inside the base panels: P A = L U for
/// n x m input with n >= m.
LuResult lur(const ConstMatrixRef& a, const MmEngine& engine = {}, const LurConfig& cfg = {});

enum class Side { left, right };
enum class Uplo { lower, upper };
enum class Diag { non_unit, unit };

/// Solves op(T) X = B (side left) or X T = B (side right) for triangular T.
/// Blocks larger than a small base are split in half and the off-diagonal
/// update runs through the engine.
Matrix solve_triangular(const ConstMatrixRef& t, const ConstMatrixRef& rhs, Side side, Uplo uplo,
                        Diag diag = Diag::non_unit, const MmEngine& engine = {});

/// In-place left-side variant used by the recursion.
void solve_triangular_inplace(const ConstMatrixRef& t, const MatrixRef& b, Uplo uplo, Diag diag,
                              const MmEngine& engine);

/// x = U^{-1} L^{-1} P b through lur.
Matrix solve_linear(const ConstMatrixRef& a, const ConstMatrixRef& b, const MmEngine& engine = {});

/// Hager's estimate of ||T^{-1}||_1 for triangular T, times ||T||_1.
double triangular_cond1_estimate(const ConstMatrixRef& t, Uplo uplo, Diag diag);

/// Column-scaled LU: factor A D^{-1}, then U <- U D. The report is recomputed
/// against the unscaled A.
LuResult columnwise_scale_wrap(const ConstMatrixRef& a, const std::function<LuResult(const ConstMatrixRef&)>& inner);

/// ||P A - L U||_F / ||A||_F.
double lu_residual(const ConstMatrixRef& a, const LuFactors& f);

}  // namespace fastla
