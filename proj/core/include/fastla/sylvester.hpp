#pragma once

#include <vector>

#include "fastla/matmul.hpp"
#include "fastla/report.hpp"

namespace fastla {

/// A R - R B = -C with A (n x n) and B (m x m) upper quasi-triangular: upper
/// triangular apart from 2 x 2 diagonal bumps.
struct SylvesterProblem {
  enum class Kind { standard };  // generalized pairs are not implemented
  Matrix A, B, C;
  Kind kind = Kind::standard;
};

struct SylrResult {
  Matrix R;
  StabilityReport report;  // residual = ||A R - R B + C||_F / ((||A||_F + ||B||_F) ||R||_F)
};

/// Recursive Sylvester solver. Solves for R21 first, then R11 and R22 (which
/// are independent of each other), then R12; each right-hand side is formed
/// explicitly through the engine before the recursive call.
SylrResult sylr(const ConstMatrixRef& a, const ConstMatrixRef& b, const ConstMatrixRef& c, const MmEngine& engine = {});
SylrResult sylr(const SylvesterProblem& p, const MmEngine& engine = {});

/// Rejects non-square, non-quasi-triangular or shape-mismatched input
/// (InvalidArgument / DimensionError) and shared eigenvalues
/// (SingularMatrixError).
void validate_sylvester(const ConstMatrixRef& a, const ConstMatrixRef& b, const ConstMatrixRef& c);

enum class SepMethod {
  exact_kronecker,      // dense SVD of I (x) A - B^T (x) I
  kronecker_iteration,  // inverse power iteration with the same operator
  diagonal_upper_bound  // min |a_ii - b_jj|, an upper bound on sep only
};
std::string to_string(SepMethod m);

struct SepEstimate {
  double value = 0.0;
  SepMethod method = SepMethod::exact_kronecker;
  bool upper_bound_only() const noexcept { return method == SepMethod::diagonal_upper_bound; }
};

/// sep(A, B) = sigma_min(I (x) A - B^T (x) I). Dense for n m <= 256, inverse
/// iteration for n m <= 4096, and the flagged diagonal upper bound beyond.
SepEstimate sep_estimate(const ConstMatrixRef& a, const ConstMatrixRef& b);

/// Relative forward-error bound from the SylR recurrence
///   err(n) = (4 + 2 (|A|+|B|)/sep) err(n/2) + eps/sep (3|C| + 2 mu(n/2) (|A|+|B|) |R|)
/// divided by |R| and clamped at 1.
double sylr_predicted_bound(Index n, Index m, double norm_a, double norm_b, double norm_c, double norm_r, double sep,
                            const MmEngine& engine);

/// ||R_sylr - R_conv||_F / (eps ||R||_F (||A||_F + ||B||_F) / sep) for the
/// conventional engine against column-by-column substitution. Triangular input.
double sylr_oracle_equivalence(const SylvesterProblem& p, double sep);

}  // namespace fastla
