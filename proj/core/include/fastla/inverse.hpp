#pragma once

#include <functional>

#include "fastla/matmul.hpp"
#include "fastla/precision.hpp"

namespace fastla {

struct InvReport {
  double residual_left = 0.0;   // ||X A - I||_F
  double residual_right = 0.0;  // ||A X - I||_F
  double kappa = 1.0;           // ||A||_2 ||X||_2 by power iteration
  Precision precision_used = Precision::working;
  /// Relative forward error bound from the error recurrence, evaluated with the
  /// measured kappa and the engine's mu_bound, clamped at 1.
  double predicted_bound = 1.0;
};

struct InvResult {
  Matrix X;
  InvReport report;
};

/// Inverse of an upper triangular matrix by the 2x2 block formula applied
/// recursively; the off-diagonal block is -(T11^{-1} T12) T22^{-1}.
InvResult tri_inv(const ConstMatrixRef& t, const MmEngine& engine = {}, Precision precision = Precision::working,
                  bool compute_report = true);

/// Inverse of a symmetric positive definite matrix through the Schur
/// complement recursion; the result is symmetrized.
InvResult spd_inv(const ConstMatrixRef& h, const MmEngine& engine = {}, Precision precision = Precision::working,
                  bool compute_report = true);

/// A^{-1} = A^T (A A^T)^{-1}. With extended precision every step, including
/// the Gram matrix, runs in double-word arithmetic.
InvResult gen_inv(const ConstMatrixRef& a, const MmEngine& engine = {}, Precision precision = Precision::working,
                  bool compute_report = true);

/// x = A^T ((A A^T)^{-1} b).
Matrix solve_via_inverse(const ConstMatrixRef& a, const ConstMatrixRef& b, const MmEngine& engine = {},
                         Precision precision = Precision::working);

/// Predicted relative bounds, exposed for tests and reports.
double tri_inv_bound(Index n, double kappa, const MmEngine& engine, double unit);
double spd_inv_bound(Index n, double kappa, const MmEngine& engine, double unit);

using Inverter = std::function<Matrix(const ConstMatrixRef&)>;

/// Recovers A*B from the (1,3) block of inv([[I, A, 0], [0, I, B], [0, 0, I]])
/// after scaling A and B to unit Frobenius norm.
Matrix theorem1_embedding(const ConstMatrixRef& a, const ConstMatrixRef& b, const Inverter& inverter);

/// Upper triangular recursion shared with the LU module; templated on scalar.
template <class T>
BasicMatrix<T> tri_inv_recursive(const BasicConstRef<T>& t, const MmEngine& engine);

}  // namespace fastla
