#pragma once

#include "fastla/matmul.hpp"
#include "fastla/matrix.hpp"

namespace fastla {

/// Orthogonal factor in WY form, Q^T = I - W*Y, with W n x m and Y m x n.
/// Every column of W has unit 2-norm and every row of Y has 2-norm 2.
struct WYFactor {
  Matrix W;
  Matrix Y;

  Index n() const noexcept { return W.rows(); }
  Index m() const noexcept { return W.cols(); }
};

/// (I - W Y) B computed as B - W (Y B).
Matrix apply_qt(const WYFactor& q, const ConstMatrixRef& b, const MmEngine& engine = {});
/// (I - W Y)^T B = B - Y^T (W^T B).
Matrix apply_q(const WYFactor& q, const ConstMatrixRef& b, const MmEngine& engine = {});
/// Explicit n x n Q = (I - W Y)^T.
Matrix form_q(const WYFactor& q);

/// One Householder reflector for the column x (length k >= 1): R = -sign(x_1)||x||
/// (sign(0) = +1), w = v/||v|| and y = 2 w^T with v = x - R e_1. A zero column
/// gets v = e_1 so the reflector is still well defined.
struct Reflector {
  std::vector<double> w;
  double r = 0.0;
};
Reflector householder_reflector(const double* x, Index k, Index stride);

/// Conventional WY panel: factor the n x m view in place, one reflector per
/// column, returning R (m x m) and the accumulated W, Y. The view is left
/// holding [R; 0].
struct PanelQr {
  Matrix R;
  WYFactor q;
};
PanelQr wy_panel(const MatrixRef& a, const MmEngine& engine = {});

/// Merge for two consecutive WY factors where the second acts on rows
/// offset..n-1: returns the factor of (I - [0;W2][0,Y2]) (I - W1 Y1).
WYFactor merge_wy(const WYFactor& first, const WYFactor& second, Index offset, const MmEngine& engine);

}  // namespace fastla
