#pragma once

#include <functional>
#include <vector>

#include "fastla/matmul.hpp"
#include "fastla/report.hpp"
#include "fastla/wy.hpp"

namespace fastla {

struct QrrConfig {
  /// Column count at or below which the recursion hands the panel to the
  /// conventional WY factorization. 1 recurses all the way down.
  Index panel_cutoff = 8;
  bool compute_report = true;
};

struct QrResult {
  Matrix R;  // m x m upper triangular
  WYFactor q;
  StabilityReport report;
};

/// Recursive QR: A = (I - W Y)^T [R; 0]. Halves the columns, factors the left
/// half, updates the right half through the engine, factors its lower part and
/// merges the two WY factors.
QrResult qrr(const ConstMatrixRef& a, const MmEngine& engine = {}, const QrrConfig& cfg = {});

/// ||A - Q [R; 0]||_F / ||A||_F and ||Q^T Q - I||_F, both in working precision.
StabilityReport qr_report(const ConstMatrixRef& a, const QrResult& r);

/// Least-squares solution of min ||A x - b||_2 via x = R^{-1} (Q^T b)(1:m).
Matrix solve_ls(const ConstMatrixRef& a, const ConstMatrixRef& b, const MmEngine& engine = {});

/// det(A) = (-1)^n prod R_ii; every reflector, including the one used for a
/// zero column, has determinant -1.
double determinant(const ConstMatrixRef& a, const MmEngine& engine = {});

/// Columns divided by their infinity norms; zero columns are left alone.
struct ColumnScaling {
  Matrix scaled;
  std::vector<double> scale;  // scale[j] = max_i |a_ij|, or 1 for a zero column
  std::vector<Index> zero_columns;
};
ColumnScaling scale_columns(const ConstMatrixRef& a);

/// Column-scaled QR: factor A D^{-1}, then R <- R D. The returned report is
/// recomputed against the unscaled A; zero columns add the "zero-column" flag.
QrResult columnwise_scale_wrap(const ConstMatrixRef& a, const std::function<QrResult(const ConstMatrixRef&)>& inner);

/// Per-column ||a_j - (Q [R;0])_j|| / ||a_j||, with the product formed in
/// double-word arithmetic from the explicit Q.
std::vector<double> columnwise_residuals(const ConstMatrixRef& a, const QrResult& r);

/// Back substitution with upper triangular R on the leading rows of B.
Matrix back_substitute(const ConstMatrixRef& r, const ConstMatrixRef& b);

}  // namespace fastla
