#pragma once

#include <cmath>
#include <vector>

#include "fastla/baseline.hpp"
#include "fastla/matmul.hpp"
#include "fastla/matrix.hpp"
#include "fastla/norms.hpp"
#include "fastla/oracle.hpp"
#include "fastla/precision.hpp"
#include "fastla/random.hpp"

namespace testutil {

using namespace fastla;

inline Matrix random_orthogonal(Index n, RngStream& rng) {
  const Matrix g = gaussian_matrix(n, n, rng);
  return householder_qr(g.view()).Q;
}

/// U diag(s) V^T with Haar-like U, V.
inline Matrix planted(const std::vector<double>& s, RngStream& rng) {
  const Index n = s.size();
  const Matrix u = random_orthogonal(n, rng);
  const Matrix v = random_orthogonal(n, rng);
  Matrix us(u);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) us(i, j) *= s[j];
  return multiply(us.view(), v.transpose().view());
}

/// Geometric spectrum from 1 down to 1/kappa.
inline std::vector<double> geometric_spectrum(Index n, double kappa) {
  std::vector<double> s(n);
  for (Index i = 0; i < n; ++i) s[i] = std::pow(kappa, -static_cast<double>(i) / static_cast<double>(n - 1));
  return s;
}

inline Matrix random_upper(Index n, RngStream& rng, double diag_shift = 0.0) {
  Matrix t(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i; j < n; ++j) t(i, j) = rng.next_gaussian();
  for (Index i = 0; i < n; ++i) t(i, i) += diag_shift;
  return t;
}

inline Matrix random_symmetric(Index n, RngStream& rng) {
  Matrix a = gaussian_matrix(n, n, rng);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < i; ++j) a(i, j) = a(j, i);
  return a;
}

inline double rel_dist(const ConstMatrixRef& x, const ConstMatrixRef& y) {
  const double d = frobenius_norm(y);
  return frobenius_distance(x, y) / (d > 0 ? d : 1.0);
}

inline constexpr double eps = kEps;

}  // namespace testutil
