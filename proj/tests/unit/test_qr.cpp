#include <bit>
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "fastla/qr.hpp"

using namespace fastla;
using testutil::eps;

namespace {

double reconstruction_dw(const Matrix& a, const QrResult& r) {
  const Index n = a.rows(), m = a.cols();
  Matrix rr(n, m);
  rr.block(0, 0, m, m).assign(r.R.view());
  const Matrix q = form_q(r.q);
  return dw_distance(a.view(), dw_multiply(q.view(), rr.view()).view());
}

void check_wy_norms(const WYFactor& q) {
  for (Index j = 0; j < q.m(); ++j) {
    double s = 0;
    for (Index i = 0; i < q.n(); ++i) s += q.W(i, j) * q.W(i, j);
    CHECK(std::fabs(std::sqrt(s) - 1.0) <= 1e-8);
  }
  for (Index i = 0; i < q.m(); ++i) {
    double s = 0;
    for (Index j = 0; j < q.n(); ++j) s += q.Y(i, j) * q.Y(i, j);
    CHECK(std::fabs(std::sqrt(s) - 2.0) <= 1e-8);
  }
}

// Exact determinant of a small integer matrix by fraction-free elimination.
long long bareiss(std::vector<std::vector<long long>> m) {
  const std::size_t n = m.size();
  long long sign = 1, prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (m[k][k] == 0) {
      std::size_t p = k + 1;
      while (p < n && m[p][k] == 0) ++p;
      if (p == n) return 0;
      std::swap(m[k], m[p]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j) {
        const __int128 v = static_cast<__int128>(m[i][j]) * m[k][k] - static_cast<__int128>(m[i][k]) * m[k][j];
        m[i][j] = static_cast<long long>(v / prev);
      }
    prev = m[k][k];
  }
  return sign * m[n - 1][n - 1];
}

}  // namespace

TEST_CASE("qrr on a single column") {
  const Matrix a = Matrix::from_rows({{3}, {4}});
  const QrResult r = qrr(a.view());
  CHECK(std::fabs(r.R(0, 0)) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(r.R(0, 0) == doctest::Approx(-5.0));  // R_11 = -sign(a_11) ||a||
  check_wy_norms(r.q);
}

TEST_CASE("qrr on the identity") {
  const QrResult r = qrr(Matrix::identity(4).view(), MmEngine::conventional(), {1, true});
  for (Index i = 0; i < 4; ++i) CHECK(std::fabs(r.R(i, i)) == 1.0);
  CHECK(r.report.residual <= 10 * eps);
  CHECK(is_upper_triangular(r.R.view()));
}

TEST_CASE("qrr random 64x64 for both engines") {
  RngStream rng(1);
  const Matrix a = gaussian_matrix(64, 64, rng);
  const double an = frobenius_norm(a.view());
  const double bound = 1e2 * 64 * 64 * eps;
  const QrResult c = qrr(a.view(), MmEngine::conventional());
  CHECK(reconstruction_dw(a, c) <= bound * an);
  CHECK(c.report.orth_defect <= bound);
  const QrResult s = qrr(a.view(), MmEngine::strassen(4));
  CHECK(reconstruction_dw(a, s) <= 10 * bound * an);
  CHECK(s.report.orth_defect <= 10 * bound);
  CHECK(s.report.residual >= 0.0);
}

TEST_CASE("qrr stability across sizes and both panel paths") {
  RngStream rng(2);
  for (Index n = 2; n <= 128; n *= 2) {
    const Matrix a = gaussian_matrix(n, n, rng);
    const double bound = 1e3 * n * n * eps;
    for (Index cutoff : {Index(1), Index(8)}) {
      const QrResult c = qrr(a.view(), MmEngine::conventional(), {cutoff, true});
      CHECK(c.report.residual <= bound);
      CHECK(c.report.orth_defect <= bound);
      check_wy_norms(c.q);
      const QrResult s = qrr(a.view(), MmEngine::strassen(1), {cutoff, true});
      CHECK(s.report.residual <= 10 * bound);
      CHECK(s.report.orth_defect <= 10 * bound);
    }
  }
}

TEST_CASE("qrr on rectangular and odd shapes") {
  RngStream rng(3);
  const Index shapes[][2] = {{7, 3}, {9, 9}, {40, 17}, {33, 1}, {5, 5}};
  for (const auto& s : shapes) {
    const Matrix a = gaussian_matrix(s[0], s[1], rng);
    const QrResult r = qrr(a.view(), MmEngine::strassen(2), {1, true});
    CHECK(r.R.rows() == s[1]);
    CHECK(r.q.W.rows() == s[0]);
    CHECK(r.report.residual <= 1e3 * s[0] * s[0] * eps);
    check_wy_norms(r.q);
  }
  CHECK_THROWS_AS(qrr(Matrix(2, 3).view()), DimensionError);
}

TEST_CASE("qrr on one column is bit-identical to householder_qr up to the sign flip") {
  RngStream rng(4);
  const Matrix a = gaussian_matrix(11, 1, rng);
  const QrResult r = qrr(a.view());
  const QrFactors h = householder_qr(a.view());
  CHECK(std::fabs(r.R(0, 0)) == h.R(0, 0));
}

TEST_CASE("rank-deficient input keeps the normalization") {
  Matrix a(6, 3);
  for (Index i = 0; i < 6; ++i) a(i, 1) = double(i);
  const QrResult r = qrr(a.view(), MmEngine::conventional(), {1, true});
  CHECK(r.R(0, 0) == 0.0);
  check_wy_norms(r.q);
  CHECK(r.report.residual <= 1e2 * eps);
}

TEST_CASE("apply_qt") {
  RngStream rng(5);
  const QrResult id = qrr(Matrix::identity(3).view(), MmEngine::conventional(), {1, false});
  const Matrix x = gaussian_matrix(3, 2, rng);
  const Matrix y = apply_qt(id.q, x.view());
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 2; ++j) CHECK(std::fabs(y(i, j)) == doctest::Approx(std::fabs(x(i, j))));

  const Matrix a = gaussian_matrix(20, 20, rng);
  const QrResult f = qrr(a.view());
  const Matrix b = gaussian_matrix(20, 4, rng);
  const double bn = frobenius_norm(b.view());
  CHECK(std::fabs(frobenius_norm(apply_qt(f.q, b.view()).view()) - bn) <= 1e3 * 400 * eps * bn);

  const Matrix tall = gaussian_matrix(20, 6, rng);
  const QrResult g = qrr(tall.view());
  const Matrix qa = apply_qt(g.q, tall.view());
  CHECK(frobenius_norm(qa.block(6, 0, 14, 6)) <= 1e2 * 400 * eps * frobenius_norm(tall.view()));
  CHECK(frobenius_distance(qa.block(0, 0, 6, 6), g.R.view()) <= 1e2 * 400 * eps * frobenius_norm(tall.view()));
  CHECK_THROWS_AS(apply_qt(g.q, Matrix(3, 3).view()), DimensionError);
}

TEST_CASE("solve_ls") {
  RngStream rng(6);
  const Matrix b = gaussian_matrix(4, 2, rng);
  CHECK(testutil::rel_dist(solve_ls(Matrix::identity(4).view(), b.view()).view(), b.view()) <= 10 * eps);
  const Matrix x = solve_ls(Matrix::from_rows({{1}, {1}}).view(), Matrix::from_rows({{0}, {2}}).view());
  CHECK(x(0, 0) == doctest::Approx(1.0).epsilon(1e-15));

  const Matrix a = gaussian_matrix(32, 8, rng);
  const Matrix x0 = gaussian_matrix(8, 1, rng);
  const Matrix rhs = multiply(a.view(), x0.view());
  const Matrix xs = solve_ls(a.view(), rhs.view(), MmEngine::strassen(2));
  CHECK(testutil::rel_dist(xs.view(), x0.view()) <= 1e3 * condition_number(a.view()) * 1024 * eps);
  CHECK_THROWS_AS(solve_ls(Matrix(3, 2).view(), Matrix(3, 1).view()), SingularMatrixError);
}

TEST_CASE("determinant") {
  CHECK(determinant(Matrix::identity(4).view()) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::fabs(determinant(Matrix::diagonal({2, 3}).view()) - 6.0) <= 1e2 * eps);
  CHECK(determinant(Matrix(3, 3).view()) == 0.0);
  RngStream rng(7);
  for (int t = 0; t < 20; ++t) {
    Matrix a(8, 8);
    std::vector<std::vector<long long>> m(8, std::vector<long long>(8));
    for (Index i = 0; i < 8; ++i)
      for (Index j = 0; j < 8; ++j) {
        m[i][j] = static_cast<long long>(rng.next_u64() % 11) - 5;
        a(i, j) = double(m[i][j]);
      }
    const double exact = double(bareiss(m));
    const double got = determinant(a.view());
    if (exact == 0.0) {
      CHECK(std::fabs(got) <= 1e-8 * std::pow(frobenius_norm(a.view()), 8));
    } else {
      CHECK(std::fabs(got - exact) <= 1e-8 * std::fabs(exact));
    }
  }
}

TEST_CASE("column scaling removes the dependence on column norms") {
  RngStream rng(8);
  const Index n = 64;
  Matrix a = gaussian_matrix(n, n, rng);
  // Thue-Morse pattern: columns j and j + 2^k always differ in scale, so every
  // Strassen split pairs a large column with a small one.
  std::vector<bool> big(n);
  for (Index j = 0; j < n; ++j) big[j] = std::popcount(j) % 2 == 0;
  for (Index j = 0; j < n; ++j)
    if (big[j])
      for (Index i = 0; i < n; ++i) a(i, j) *= 1e9;
  // Conventional products keep columns apart; the Strassen sums mix them.
  const MmEngine e = MmEngine::strassen(4);
  const QrResult plain = qrr(a.view(), e);
  const QrResult wrapped = columnwise_scale_wrap(a.view(), [&](const ConstMatrixRef& x) { return qrr(x, e); });
  const auto rp = columnwise_residuals(a.view(), plain);
  const auto rw = columnwise_residuals(a.view(), wrapped);
  double worst_plain = 0, worst_wrapped = 0;
  for (Index j = 0; j < n; ++j) {
    if (big[j]) continue;
    worst_plain = std::max(worst_plain, rp[j]);
    worst_wrapped = std::max(worst_wrapped, rw[j]);
  }
  for (double v : rw) CHECK(v <= 1e2 * n * n * eps);
  CHECK(worst_plain >= 1e4 * worst_wrapped);
}

TEST_CASE("column scaling edge cases") {
  RngStream rng(9);
  Matrix a = gaussian_matrix(6, 4, rng);
  for (Index i = 0; i < 6; ++i) a(i, 2) = 0.0;
  const auto inner = [](const ConstMatrixRef& x) { return qrr(x); };
  const QrResult r = columnwise_scale_wrap(a.view(), inner);
  CHECK(r.report.has_flag("zero-column"));
  CHECK(r.report.residual <= 1e2 * 36 * eps);

  // Entries that are already powers of two scale exactly.
  Matrix u = gaussian_matrix(6, 4, rng);
  for (Index j = 0; j < 4; ++j) {
    double mx = 0;
    for (Index i = 0; i < 6; ++i) mx = std::max(mx, std::fabs(u(i, j)));
    for (Index i = 0; i < 6; ++i) u(i, j) /= mx;
  }
  const QrResult direct = qrr(u.view());
  const QrResult wrapped = columnwise_scale_wrap(u.view(), inner);
  CHECK(frobenius_distance(direct.R.view(), wrapped.R.view()) <= 4 * eps * frobenius_norm(direct.R.view()));
}

TEST_CASE("qrr mult-count exponent with strassen cutoff 1") {
  std::vector<Index> sizes{64, 128, 256, 512};
  std::vector<double> counts;
  for (Index n : sizes) {
    OpCounter c;
    const Matrix a = Matrix::identity(n);
    qrr(a.view(), MmEngine::strassen(1, &c), {8, false});
    counts.push_back(double(c.scalar_mults));
  }
  const double slope = fit_exponent(sizes, counts);
  CHECK(std::fabs(slope - std::log2(7.0)) <= 0.15);
}
