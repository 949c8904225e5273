#pragma once

// Slow, independent reference computations. They share no code path with the
// recursive algorithms and are used to check them: Jacobi rotations for
// spectra, and double-word Gaussian elimination for solves and inverses.

#include <vector>

#include "fastla/matrix.hpp"

namespace fastla {

struct SvdResult {
  Matrix U;               // m x k, k = min(m, n)
  std::vector<double> s;  // descending
  Matrix V;               // n x k
};

/// One-sided (Hestenes) Jacobi SVD.
SvdResult jacobi_svd(const ConstMatrixRef& a);
std::vector<double> singular_values(const ConstMatrixRef& a);
double sigma_min(const ConstMatrixRef& a);
double sigma_max(const ConstMatrixRef& a);
/// sigma_max / sigma_min (infinity for a singular matrix).
double condition_number(const ConstMatrixRef& a);

struct EighResult {
  std::vector<double> values;  // ascending
  Matrix vectors;              // columns
};

/// Cyclic two-sided Jacobi for a symmetric matrix (upper triangle is read).
EighResult jacobi_eigh(const ConstMatrixRef& a);

/// Product in double-word arithmetic.
MatrixDW dw_multiply(const ConstMatrixRef& a, const ConstMatrixRef& b);

/// Solves A X = B with partial pivoting in double-word arithmetic.
MatrixDW dw_solve(const ConstMatrixRef& a, const ConstMatrixRef& b);
MatrixDW dw_inverse(const ConstMatrixRef& a);
/// Inverse of an SPD matrix through a double-word Cholesky factorization.
MatrixDW dw_spd_inverse(const ConstMatrixRef& h);
/// Inverse of an upper triangular matrix by double-word back substitution.
MatrixDW dw_tri_inverse(const ConstMatrixRef& t);

/// K = I (x) A - B^T (x) I acting on column-stacked vec(R), so that
/// K vec(R) = vec(A R - R B).
Matrix kronecker_matrix(const ConstMatrixRef& a, const ConstMatrixRef& b);
/// A R - R B = -C through a dense double-word solve with K. Meant for n*m of a
/// few hundred at most.
MatrixDW kronecker_sylvester(const ConstMatrixRef& a, const ConstMatrixRef& b, const ConstMatrixRef& c);

/// ||X - Y||_F with Y held in double-word precision.
double dw_distance(const ConstMatrixRef& x, const BasicConstRef<DoubleWord>& y);

}  // namespace fastla
