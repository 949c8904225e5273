#pragma once

// Conventional reference algorithms: pointwise Householder QR and Gaussian
// elimination, the blocked LU/QR variants with an explicit block size, and the
// column-by-column triangular Sylvester solver.

#include <optional>
#include <vector>

#include "fastla/matmul.hpp"
#include "fastla/matrix.hpp"
#include "fastla/wy.hpp"

namespace fastla {

struct QrFactors {
  Matrix Q;  // n x m, orthonormal columns
  Matrix R;  // m x m, nonnegative diagonal
};

/// Householder QR with R's diagonal flipped to be nonnegative.
QrFactors householder_qr(const ConstMatrixRef& a);

/// Row-permuted LU: row i of P*A is row perm[i] of A.
struct LuFactors {
  std::vector<Index> perm;
  Matrix L;  // n x m unit lower trapezoidal
  Matrix U;  // m x m upper triangular
  double growth = 1.0;                  // max|U| / max|A|
  std::optional<Index> zero_pivot;      // first exactly-zero pivot, if any
  bool singular() const noexcept { return zero_pivot.has_value(); }
};

/// Right-looking Gaussian elimination with partial pivoting on an n x m view
/// (n >= m), in place: on return the view holds L below and U on/above the
/// diagonal. Row swaps are applied to the whole view and appended to `perm`
/// as (row, swapped-with) pairs relative to the view. Ties go to the first row.
struct PanelLu {
  std::vector<Index> pivots;        // pivots[k] = row swapped with row k
  std::optional<Index> zero_pivot;  // relative to the view
};
PanelLu lu_panel(const MatrixRef& a, const MmEngine& engine = {});

LuFactors gepp_lu(const ConstMatrixRef& a);

/// Permutation helpers shared by the LU variants.
std::vector<Index> pivots_to_perm(const std::vector<Index>& pivots, Index n);
Matrix permute_rows(const ConstMatrixRef& a, const std::vector<Index>& perm);
LuFactors unpack_lu(const ConstMatrixRef& packed, std::vector<Index> perm, const ConstMatrixRef& original,
                    std::optional<Index> zero_pivot);

struct BlockConfig {
  Index block_size = 0;  // 0 means use the recommended size
  double gamma = 3.0;

  /// round(n^{1/(4-gamma)}), clamped to [1, n].
  static Index recommended(Index n, double gamma);
  Index resolve(Index n) const;
};

/// Exponent (9 - 2 gamma)/(4 - gamma) of the blocked algorithms' cost at the
/// balancing block size.
double blocked_cost_exponent(double gamma);

LuFactors block_lu(const ConstMatrixRef& a, const BlockConfig& cfg, const MmEngine& engine = {});

struct BlockQrResult {
  WYFactor q;
  Matrix R;
};
BlockQrResult block_qr(const ConstMatrixRef& a, const BlockConfig& cfg, const MmEngine& engine = {});

/// Solves A R - R B = -C for upper triangular A (n x n) and B (m x m) by
/// substitution, one column of R at a time. Throws SingularMatrixError when
/// some a_ii equals some b_jj.
Matrix conventional_sylvester(const ConstMatrixRef& a, const ConstMatrixRef& b, const ConstMatrixRef& c);

/// Same recurrence carried out in double-word arithmetic.
MatrixDW conventional_sylvester_dw(const ConstMatrixRef& a, const ConstMatrixRef& b, const ConstMatrixRef& c);

}  // namespace fastla
