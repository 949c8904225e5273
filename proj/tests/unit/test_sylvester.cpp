#include <cmath>

#include "doctest.h"
#include "fastla/sylvester.hpp"
#include "helpers.hpp"

using namespace fastla;
using testutil::eps;

namespace {

// Triangular A with spectrum in [lo_a, lo_a + 1], B in [lo_b, lo_b + 1] and
// off-diagonal entries of size `off`.
Matrix random_tri(Index n, double lo, double off, RngStream& rng) {
  Matrix t(n, n);
  for (Index i = 0; i < n; ++i) {
    t(i, i) = lo + rng.next_uniform();
    for (Index j = i + 1; j < n; ++j) t(i, j) = off * rng.next_gaussian();
  }
  return t;
}

SylvesterProblem random_problem(Index n, Index m, RngStream& rng, double off = 0.3) {
  return {random_tri(n, 3.0, off, rng), random_tri(m, -2.0, off, rng), gaussian_matrix(n, m, rng)};
}

double rel_error(const Matrix& r, const MatrixDW& truth) {
  return dw_distance(r.view(), truth.view()) / frobenius_norm(narrow(truth.view()).view());
}

}  // namespace

TEST_CASE("sylr examples") {
  const SylrResult s = sylr(Matrix::from_rows({{3}}).view(), Matrix::from_rows({{1}}).view(),
                            Matrix::from_rows({{-4}}).view());
  CHECK(s.R(0, 0) == 2.0);

  const Matrix a = Matrix::from_rows({{3, 1}, {0, 4}});
  const Matrix b = Matrix::from_rows({{1, 2}, {0, 2}});
  RngStream rng(41);
  const Matrix c = gaussian_matrix(2, 2, rng);
  const SylrResult r = sylr(a.view(), b.view(), c.view());
  const MatrixDW k = kronecker_sylvester(a.view(), b.view(), c.view());
  CHECK(rel_error(r.R, k) <= 1e-10);

  const SylrResult z = sylr(a.view(), b.view(), Matrix(2, 2).view());
  CHECK(max_abs(z.R.view()) == 0.0);

  CHECK_THROWS_AS(sylr(a.view(), Matrix::from_rows({{4}}).view(), Matrix(2, 1).view()), SingularMatrixError);
  CHECK_THROWS_AS(sylr(Matrix::from_rows({{1, 0}, {1, 1}}).view(), b.view(), c.view()), SingularMatrixError);
  CHECK_THROWS_AS(sylr(Matrix::from_rows({{1, 0, 0}, {1, 2, 0}, {1, 1, 3}}).view(), b.view(), Matrix(3, 2).view()),
                  InvalidArgument);
  CHECK_THROWS_AS(sylr(a.view(), b.view(), Matrix(3, 2).view()), DimensionError);
}

TEST_CASE("sylr matches the Kronecker solve on a small grid") {
  RngStream rng(42);
  for (Index n = 1; n <= 16; n += 3)
    for (Index m = 1; m <= 16; m += 5) {
      const SylvesterProblem p = random_problem(n, m, rng);
      const MatrixDW truth = kronecker_sylvester(p.A.view(), p.B.view(), p.C.view());
      const double sep = sep_estimate(p.A.view(), p.B.view()).value;
      const double tol = 1e3 * eps * (frobenius_norm(p.A.view()) + frobenius_norm(p.B.view())) / sep;
      for (const MmEngine& eng : {MmEngine::conventional(), MmEngine::strassen(1)}) {
        const SylrResult s = sylr(p, eng);
        CHECK(rel_error(s.R, truth) <= tol);
        CHECK(s.report.residual <= 1e3 * double((n + m) * (n + m)) * eps);
      }
    }
}

TEST_CASE("sylr random 64x64 within the recurrence bound") {
  RngStream rng(43);
  const SylvesterProblem p = random_problem(64, 64, rng, 0.05);
  const SepEstimate sep = sep_estimate(p.A.view(), p.B.view());
  CHECK(sep.method == SepMethod::kronecker_iteration);
  CHECK(sep.value >= 1.0);
  const MatrixDW truth = conventional_sylvester_dw(p.A.view(), p.B.view(), p.C.view());
  for (const MmEngine& eng : {MmEngine::conventional(), MmEngine::strassen(4)}) {
    const SylrResult s = sylr(p, eng);
    const double na = frobenius_norm(p.A.view()), nb = frobenius_norm(p.B.view());
    const double bound = sylr_predicted_bound(64, 64, na, nb, frobenius_norm(p.C.view()),
                                              frobenius_norm(s.R.view()), sep.value, eng);
    const double err = rel_error(s.R, truth);
    CHECK(err <= bound);
    CHECK(err <= 1e3 * eps * (na + nb) / sep.value);
  }
}

TEST_CASE("sylr handles 2x2 bumps") {
  RngStream rng(44);
  Matrix a = random_tri(7, 3.0, 0.3, rng);
  a(2, 1) = -0.8;  // complex pair in rows 1..2
  Matrix b = random_tri(5, -2.0, 0.3, rng);
  b(4, 3) = 0.9;
  b(3, 4) = -1.1;
  const Matrix c = gaussian_matrix(7, 5, rng);
  const MatrixDW truth = kronecker_sylvester(a.view(), b.view(), c.view());
  for (const MmEngine& eng : {MmEngine::conventional(), MmEngine::strassen(1)}) {
    const SylrResult s = sylr(a.view(), b.view(), c.view(), eng);
    CHECK(rel_error(s.R, truth) <= 1e3 * 35 * eps);
  }
}

TEST_CASE("sep_estimate") {
  CHECK(sep_estimate(Matrix::from_rows({{3}}).view(), Matrix::from_rows({{1}}).view()).value == 2.0);
  CHECK(sep_estimate(Matrix::diagonal({1, 2}).view(), Matrix::from_rows({{0}}).view()).value ==
        doctest::Approx(1.0).epsilon(1e-14));

  RngStream rng(45);
  const Matrix a = random_tri(4, 0.0, 1.0, rng), b = random_tri(4, 0.5, 1.0, rng);
  const SepEstimate s = sep_estimate(a.view(), b.view());
  const std::vector<double> sv = singular_values(kronecker_matrix(a.view(), b.view()).view());
  CHECK(s.method == SepMethod::exact_kronecker);
  CHECK(std::fabs(s.value - sv.back()) <= 1e-8 * sv.back());

  // The iterative path agrees with the dense one where both apply.
  const Matrix a2 = random_tri(20, 0.0, 0.5, rng), b2 = random_tri(15, 1.2, 0.5, rng);
  const double dense = sigma_min(kronecker_matrix(a2.view(), b2.view()).view());
  const SepEstimate it = sep_estimate(a2.view(), b2.view());
  CHECK(it.method == SepMethod::kronecker_iteration);
  CHECK(std::fabs(it.value - dense) <= 1e-8 * dense);

  const SepEstimate big = sep_estimate(random_tri(65, 2.0, 0.1, rng).view(), random_tri(65, 0.0, 0.1, rng).view());
  CHECK(big.upper_bound_only());
  CHECK(to_string(SepMethod::diagonal_upper_bound) == "diagonal-upper-bound");
}

TEST_CASE("subproblems are no worse separated than the parent") {
  RngStream rng(46);
  for (int t = 0; t < 3; ++t) {
    const Matrix a = random_tri(8, 0.0, 1.0, rng), b = random_tri(8, 0.2, 1.0, rng);
    const double parent = sep_estimate(a.view(), b.view()).value;
    for (Index i = 1; i < 8; ++i)
      for (Index j = 1; j < 8; ++j) {
        const ConstMatrixRef as[2] = {a.block(0, 0, i, i), a.block(i, i, 8 - i, 8 - i)};
        const ConstMatrixRef bs[2] = {b.block(0, 0, j, j), b.block(j, j, 8 - j, 8 - j)};
        for (const auto& x : as)
          for (const auto& y : bs) CHECK(sep_estimate(x, y).value >= parent - 1e-10);
      }
  }
}

TEST_CASE("sylr oracle equivalence") {
  RngStream rng(47);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const SylvesterProblem p = random_problem(1 + t % 16, 1 + (5 * t) % 16, rng);
    worst = std::max(worst, sylr_oracle_equivalence(p, sep_estimate(p.A.view(), p.B.view()).value));
  }
  CHECK(worst <= 1e3);

  // Diagonal, well separated: both paths reduce to the same divisions.
  const SylvesterProblem d{Matrix::diagonal({5, 6, 7}), Matrix::diagonal({-1, -2}), gaussian_matrix(3, 2, rng)};
  CHECK(sylr_oracle_equivalence(d, 6.0) <= 10.0);

  // Nearly shared eigenvalue.
  SylvesterProblem close = random_problem(6, 6, rng);
  close.A(5, 5) = close.B(0, 0) + 1e-6;
  const double sep = sep_estimate(close.A.view(), close.B.view()).value;
  CHECK(sylr_oracle_equivalence(close, sep) <= 1e3);

  const SylvesterProblem zero{d.A, d.B, Matrix(3, 2)};
  CHECK(sylr_oracle_equivalence(zero, 6.0) == 0.0);
}

TEST_CASE("sylr forward error growth with shrinking sep") {
  RngStream rng(48);
  SylvesterProblem p = random_problem(32, 32, rng, 0.1);
  for (double target : {1.0, 1e-2, 1e-4}) {
    p.A(31, 31) = p.B(0, 0) + target;
    const double sep = sep_estimate(p.A.view(), p.B.view()).value;
    const MatrixDW truth = conventional_sylvester_dw(p.A.view(), p.B.view(), p.C.view());
    const SylrResult s = sylr(p, MmEngine::strassen(2));
    const double growth = std::pow(1.0 / sep, 1.0 + std::log2(32.0));
    CHECK(rel_error(s.R, truth) <= 1e3 * eps * std::max(1.0, growth));
  }
}

TEST_CASE("sylr mult-count exponent") {
  std::vector<Index> sizes;
  std::vector<double> counts;
  for (Index n = 32; n <= 256; n *= 2) {
    RngStream rng(n);
    const SylvesterProblem p = random_problem(n, n, rng);
    OpCounter c;
    sylr(p, MmEngine::strassen(1).with_counter(&c));
    sizes.push_back(n);
    counts.push_back(double(c.scalar_mults));
  }
  CHECK(std::fabs(fit_exponent(sizes, counts) - std::log2(7.0)) <= 0.15);
}
