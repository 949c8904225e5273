#pragma once

#include <string>
#include <string_view>

#include "fastla/matrix.hpp"

namespace fastla {

enum class NormKind { frobenius, two, one, inf, sum };

std::string to_string(NormKind k);
NormKind parse_norm_kind(std::string_view s);

double norm(const ConstMatrixRef& a, NormKind kind);

double frobenius_norm(const ConstMatrixRef& a);
double one_norm(const ConstMatrixRef& a);
double inf_norm(const ConstMatrixRef& a);
double sum_norm(const ConstMatrixRef& a);  // sum of |a_ij|
double max_abs(const ConstMatrixRef& a);

/// Largest singular value by power iteration on A^T A: at most 50 sweeps,
/// stopping once successive estimates agree to 1e-8 relative. The estimate
/// never exceeds the true value by more than rounding.
double two_norm_estimate(const ConstMatrixRef& a, int max_iters = 50, double tol = 1e-8);

/// ||A - B||_F without materializing the difference.
double frobenius_distance(const ConstMatrixRef& a, const ConstMatrixRef& b);

/// ||A^T A - I||_F for a matrix with orthonormal columns.
double orthogonality_defect(const ConstMatrixRef& q);

double frobenius_norm(const BasicConstRef<DoubleWord>& a);

}  // namespace fastla
