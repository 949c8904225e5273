#include <cmath>

#include "doctest.h"
#include "fastla/inverse.hpp"
#include "fastla/lu.hpp"
#include "fastla/qr.hpp"
#include "helpers.hpp"

using namespace fastla;
using testutil::eps;

namespace {

// Upper triangular factor with exactly the singular values of a planted
// matrix, so kappa(T) is known in advance.
Matrix triangular_with_kappa(Index n, double kappa, RngStream& rng) {
  const Matrix a = testutil::planted(testutil::geometric_spectrum(n, kappa), rng);
  return householder_qr(a.view()).R;
}

Matrix spd_with_kappa(Index n, double kappa, RngStream& rng) {
  const Matrix q = testutil::random_orthogonal(n, rng);
  const std::vector<double> s = testutil::geometric_spectrum(n, kappa);
  Matrix qs(q);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) qs(i, j) *= s[j];
  Matrix h = multiply(qs.view(), q.transpose().view(), MmEngine::conventional());
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < i; ++j) h(i, j) = h(j, i);
  return h;
}

double forward_error(const Matrix& x, const MatrixDW& truth) {
  return dw_distance(x.view(), truth.view()) / frobenius_norm(narrow(truth.view()).view());
}

}  // namespace

TEST_CASE("tri_inv examples") {
  CHECK(tri_inv(Matrix::diagonal({2, 4}).view()).X == Matrix::diagonal({0.5, 0.25}));
  CHECK(tri_inv(Matrix::from_rows({{1, 1}, {0, 1}}).view()).X == Matrix::from_rows({{1, -1}, {0, 1}}));
  CHECK_THROWS_AS(tri_inv(Matrix::from_rows({{1, 1}, {0, 0}}).view()), SingularMatrixError);
  CHECK_THROWS_AS(tri_inv(Matrix::from_rows({{1, 0}, {1, 1}}).view()), InvalidArgument);
}

TEST_CASE("tri_inv on the unit upper bidiagonal is exact") {
  for (Index n = 1; n <= 8; ++n) {
    Matrix t = Matrix::identity(n);
    for (Index i = 0; i + 1 < n; ++i) t(i, i + 1) = 1.0;
    const Matrix x = tri_inv(t.view()).X;
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) CHECK(x(i, j) == (j < i ? 0.0 : ((j - i) % 2 ? -1.0 : 1.0)));
  }
}

TEST_CASE("tri_inv forward error within the recurrence bound") {
  RngStream rng(21);
  std::vector<double> kappas = {1e1, 1e2, 1e3, 1e4};
  std::vector<double> errs, bounds;
  for (double k : kappas) {
    const Matrix t = triangular_with_kappa(64, k, rng);
    const MatrixDW truth = dw_tri_inverse(t.view());
    for (const MmEngine& eng : {MmEngine::conventional(), MmEngine::strassen(4)}) {
      const InvResult r = tri_inv(t.view(), eng);
      const double err = forward_error(r.X, truth);
      CHECK(err <= r.report.predicted_bound);
      CHECK(r.report.kappa >= 1.0 - 1e-6);
      CHECK(r.report.kappa == doctest::Approx(k).epsilon(0.05));
      if (eng.kind == EngineKind::conventional) {
        errs.push_back(err);
        bounds.push_back(tri_inv_bound(64, r.report.kappa, eng, kEps));
      }

      const InvResult x = tri_inv(t.view(), eng, Precision::extended);
      CHECK(x.report.precision_used == Precision::extended);
      CHECK(forward_error(x.X, truth) <= 1e3 * 64 * 64 * eps * k);
    }
  }
  // Measured error grows no faster in kappa than the unclamped recurrence.
  const double slope = std::log10(errs.back() / errs.front()) / 3.0;
  const double rec_slope = 1.0 + std::log2(64.0);
  CHECK(slope <= rec_slope + 0.5);
}

TEST_CASE("spd_inv examples") {
  CHECK(spd_inv(Matrix::identity(4).view()).X == Matrix::identity(4));
  const Matrix d = Matrix::diagonal({1, 1, 1, 1e-3});
  const InvResult r = spd_inv(d.view());
  CHECK(r.X(3, 3) == doctest::Approx(1e3));
  CHECK(r.report.residual_left <= 1e2 * eps * 1e3);
  CHECK_THROWS_AS(spd_inv(Matrix::from_rows({{1, 2}, {2, 1}}).view()), NotPositiveDefiniteError);
  CHECK_THROWS_AS(spd_inv(Matrix::from_rows({{2, 1}, {0, 2}}).view()), InvalidArgument);
}

TEST_CASE("spd_inv random within the recurrence bound") {
  RngStream rng(22);
  for (double k : {1e1, 1e2, 1e3}) {
    const Matrix h = spd_with_kappa(64, k, rng);
    const MatrixDW truth = dw_spd_inverse(h.view());
    for (const MmEngine& eng : {MmEngine::conventional(), MmEngine::strassen(4)}) {
      const InvResult r = spd_inv(h.view(), eng);
      CHECK(forward_error(r.X, truth) <= r.report.predicted_bound);
      for (Index i = 0; i < 64; ++i)
        for (Index j = 0; j < i; ++j) CHECK(r.X(i, j) == r.X(j, i));
      const InvResult x = spd_inv(h.view(), eng, Precision::extended);
      CHECK(x.report.residual_left <= 1e3 * 64 * 64 * eps * k);
      CHECK(forward_error(x.X, truth) <= 1e3 * 64 * 64 * eps * k);
    }
  }
}

TEST_CASE("spd Schur complement is no worse conditioned than H") {
  RngStream rng(23);
  for (int t = 0; t < 5; ++t) {
    const Matrix h = spd_with_kappa(32, 1e3, rng);
    const Index m = 16;
    const Matrix a(h.block(0, 0, m, m));
    const Matrix b(h.block(0, m, m, m));
    const Matrix c(h.block(m, m, m, m));
    const MatrixDW ai = dw_spd_inverse(a.view());
    const MatrixDW aib = dw_multiply(narrow(ai.view()).view(), b.view());
    const Matrix baib = multiply(b.transpose().view(), narrow(aib.view()).view());
    const Matrix s = subtract(c, baib);
    CHECK(condition_number(s.view()) <= condition_number(h.view()) * (1 + 1e-6));
  }
}

TEST_CASE("gen_inv examples") {
  RngStream rng(24);
  const Matrix q = form_q(qrr(gaussian_matrix(32, 32, rng).view()).q);
  const InvResult r = gen_inv(q.view());
  CHECK(frobenius_distance(r.X.view(), q.transpose().view()) <= 1e3 * 32 * 32 * eps);

  const InvResult d = gen_inv(Matrix::diagonal({1, 1e-2}).view());
  CHECK(std::fabs(d.X(1, 1) - 1e2) / 1e2 <= 1e3 * eps * 1e4);
  CHECK(std::fabs(d.X(0, 0) - 1.0) <= 1e3 * eps * 1e4);
  CHECK(d.X(0, 1) == 0.0);

  CHECK_THROWS_AS(gen_inv(Matrix::from_rows({{1, 2}, {2, 4}}).view()), SingularMatrixError);
  CHECK_THROWS_AS(gen_inv(Matrix(2, 3).view()), DimensionError);
}

TEST_CASE("gen_inv random against an extended-precision LU inverse") {
  RngStream rng(25);
  const Matrix a = testutil::planted(testutil::geometric_spectrum(32, 1e2), rng);
  const MatrixDW truth = dw_inverse(a.view());
  for (Precision p : {Precision::working, Precision::extended}) {
    const InvResult r = gen_inv(a.view(), MmEngine::strassen(4), p);
    CHECK(forward_error(r.X, truth) <= r.report.predicted_bound);
    CHECK(r.report.predicted_bound <= 1.0);
  }
  // Working precision pays for kappa^2; extended does not.
  const double ew = forward_error(gen_inv(a.view()).X, truth);
  const double ex = forward_error(gen_inv(a.view(), {}, Precision::extended).X, truth);
  CHECK(ew <= 1e3 * 32 * 32 * eps * 1e4);
  CHECK(ex <= 1e3 * 32 * 32 * eps * 1e2);
  CHECK(ex <= ew);
}

TEST_CASE("solve_via_inverse") {
  const Matrix b = Matrix::from_rows({{1}, {2}, {3}});
  CHECK(frobenius_distance(solve_via_inverse(Matrix::identity(3).view(), b.view()).view(), b.view()) == 0.0);

  RngStream rng(26);
  const Matrix q = testutil::random_orthogonal(16, rng);
  const Matrix bq = gaussian_matrix(16, 2, rng);
  const Matrix xq = solve_via_inverse(q.view(), bq.view());
  CHECK(testutil::rel_dist(xq.view(), multiply(q.transpose().view(), bq.view()).view()) <= 1e3 * 256 * eps);

  const Matrix a = testutil::planted(testutil::geometric_spectrum(24, 1e3), rng);
  const Matrix x0 = gaussian_matrix(24, 1, rng);
  const Matrix rhs = multiply(a.view(), x0.view());
  const Matrix x = solve_via_inverse(a.view(), rhs.view(), {}, Precision::extended);
  const double bound = gen_inv(a.view(), {}, Precision::extended).report.predicted_bound;
  CHECK(testutil::rel_dist(x.view(), x0.view()) <= std::max(bound, 1e3 * 24 * 24 * eps * 1e3));
}

TEST_CASE("block embedding inverse extracts the product") {
  const Inverter by_tri = [](const ConstMatrixRef& m) { return tri_inv(m, {}, Precision::working, false).X; };
  const Matrix i2 = Matrix::identity(2);
  CHECK(testutil::rel_dist(theorem1_embedding(i2.view(), i2.view(), by_tri).view(), i2.view()) <= 4 * eps);

  const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
  const Matrix b = Matrix::from_rows({{5, 6}, {7, 8}});
  const Matrix ab = theorem1_embedding(a.view(), b.view(), by_tri);
  const double scale = frobenius_norm(a.view()) * frobenius_norm(b.view());
  CHECK(frobenius_distance(ab.view(), Matrix::from_rows({{19, 22}, {43, 50}}).view()) <= 1e3 * eps * scale);

  const Matrix z = theorem1_embedding(Matrix(3, 2).view(), b.view(), by_tri);
  CHECK(max_abs(z.view()) == 0.0);

  const Inverter by_gen = [](const ConstMatrixRef& m) { return gen_inv(m, {}, Precision::working, false).X; };
  RngStream rng(27);
  for (int t = 0; t < 100; ++t) {
    const Index p = 1 + t % 32, q = 1 + (7 * t) % 32, r = 1 + (13 * t) % 32;
    const Matrix x = gaussian_matrix(p, q, rng);
    const Matrix y = gaussian_matrix(q, r, rng);
    const Matrix ref = multiply(x.view(), y.view(), MmEngine::conventional());
    const double s = frobenius_norm(x.view()) * frobenius_norm(y.view());
    const Matrix got = theorem1_embedding(x.view(), y.view(), t % 2 ? by_gen : by_tri);
    CHECK(frobenius_distance(got.view(), ref.view()) <= 1e4 * eps * s);
  }
  CHECK_THROWS_AS(theorem1_embedding(a.view(), Matrix(3, 3).view(), by_tri), DimensionError);
}

TEST_CASE("mu_bound") {
  CHECK(mu_bound(MmEngine::conventional(), 64) == 64.0);
  CHECK(mu_bound(MmEngine::strassen(64), 64) == 64.0);
  CHECK(mu_bound(MmEngine::strassen(32), 64) == 18.0 * (32 * 32 + 6 * 32) - 6 * 64);
  CHECK(tri_inv_bound(64, 1e8, MmEngine::conventional(), eps) == 1.0);
  CHECK(tri_inv_bound(1, 1.0, MmEngine::conventional(), eps) == eps);
}
