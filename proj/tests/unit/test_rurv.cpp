#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "fastla/rurv.hpp"
#include "helpers.hpp"

using namespace fastla;
using testutil::eps;

namespace {

struct Planted {
  Matrix a, q;
  std::vector<double> sigma;
};

// A = P diag(sigma) Q^T with sigma descending.
Planted planted_with_basis(const std::vector<double>& sigma, RngStream& rng) {
  const Index n = sigma.size();
  const Matrix p = testutil::random_orthogonal(n, rng);
  const Matrix q = testutil::random_orthogonal(n, rng);
  Matrix ps(p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) ps(i, j) *= sigma[j];
  return {multiply(ps.view(), q.transpose().view(), MmEngine::conventional()), q, sigma};
}

}  // namespace

TEST_CASE("haar_orthogonal is orthogonal and sign-symmetric") {
  RngStream rng(31);
  for (Index n : {Index(1), Index(5), Index(33)}) {
    const Matrix q = haar_orthogonal(n, rng);
    CHECK(orthogonality_defect(q.view()) <= 1e3 * double(n * n) * eps);
  }
  // n = 1: +1 and -1 equally likely (chi-square, one degree of freedom).
  int plus = 0;
  for (int s = 0; s < 1000; ++s) {
    RngStream r(1000 + s);
    plus += haar_orthogonal(1, r)(0, 0) > 0;
  }
  const double chi2 = 2.0 * std::pow(plus - 500.0, 2) / 500.0;
  CHECK(chi2 < 6.635);  // p > 0.01
}

TEST_CASE("haar_orthogonal n=2 angle is uniform") {
  std::vector<double> u;
  for (int s = 0; s < 2000; ++s) {
    RngStream r(5000 + s);
    const Matrix q = haar_orthogonal(2, r);
    double th = std::atan2(q(1, 0), q(0, 0));
    if (th < 0) th += 2 * M_PI;
    u.push_back(th / (2 * M_PI));
  }
  std::sort(u.begin(), u.end());
  double ks = 0.0;
  for (Index i = 0; i < u.size(); ++i)
    ks = std::max({ks, std::fabs(u[i] - double(i) / u.size()), std::fabs(u[i] - double(i + 1) / u.size())});
  CHECK(ks < 0.05);
}

TEST_CASE("rurv examples") {
  RngStream rng(32);
  const UrvResult z = rurv(Matrix(6, 6).view(), rng);
  CHECK(max_abs(z.R.view()) == 0.0);
  CHECK(z.report.residual == 0.0);

  const Matrix q = testutil::random_orthogonal(20, rng);
  const UrvResult u = rurv(q.view(), rng);
  for (double s : singular_values(u.R.view())) CHECK(std::fabs(s - 1.0) <= 1e3 * 400 * eps);
  CHECK(is_upper_triangular(u.R.view()));
  CHECK_THROWS_AS(rurv(Matrix(3, 2).view(), rng), DimensionError);
}

TEST_CASE("rurv reconstruction") {
  RngStream rng(33);
  for (const MmEngine& eng : {MmEngine::conventional(), MmEngine::strassen(4)}) {
    for (Index n : {Index(8), Index(31), Index(64)}) {
      const Matrix a = gaussian_matrix(n, n, rng);
      const UrvResult u = rurv(a.view(), rng, eng);
      CHECK(u.report.residual <= 1e3 * double(n * n) * eps);
      CHECK(orthogonality_defect(u.V.view()) <= 1e3 * double(n * n) * eps);
    }
  }
}

TEST_CASE("rurv reveals a planted gap") {
  RngStream rng(34);
  std::vector<double> sigma(64);
  for (Index i = 0; i < 64; ++i) sigma[i] = i < 2 ? std::pow(10.0, -double(i)) : 1e-8 * std::pow(0.9, double(i - 2));
  for (int s = 0; s < 10; ++s) {
    const Planted p = planted_with_basis(sigma, rng);
    const UrvResult u = rurv(p.a.view(), rng);
    const RankRevealReport rep = rank_reveal_report(u, 2, &p.sigma, &p.q);
    REQUIRE(rep.f.has_value());
    CHECK(*rep.upper_bound_check);
    CHECK(*rep.f_lower_bound_check);
    CHECK(rep.sigma_min_leading <= std::sqrt(2.0) * 1e-1);
    CHECK(*rep.gap_ratio == doctest::Approx(1e-7));
    if (rep.trailing_bound_check) CHECK(*rep.trailing_bound_check);
  }
}

TEST_CASE("trailing_block_bound") {
  const std::vector<double> s = {1.0, 0.5, 1e-6};
  CHECK(trailing_block_bound(s, 2, 0.5) == doctest::Approx(3e-6 * 16 * 8 / (1 - 1e-12 / 0.0625)));
  CHECK(std::isinf(trailing_block_bound(s, 2, 1e-7)));
  CHECK_THROWS_AS(trailing_block_bound(s, 3, 0.5), InvalidArgument);
}

TEST_CASE("exact_rank_probe") {
  RngStream rng(35);
  for (int s = 0; s < 100; ++s) {
    const Matrix u = gaussian_matrix(16, 1, rng), v = gaussian_matrix(1, 16, rng);
    const Matrix a = multiply(u.view(), v.view());
    REQUIRE(exact_rank_probe(a.view(), rng) == 1);
  }
  CHECK(exact_rank_probe(Matrix::identity(9).view(), rng) == 9);

  std::vector<double> sigma(32, 0.0);
  for (Index i = 0; i < 5; ++i) sigma[i] = 1.0 - 0.1 * double(i);
  for (int s = 0; s < 100; ++s) {
    const Matrix a = testutil::planted(sigma, rng);
    REQUIRE(exact_rank_probe(a.view(), rng) == 5);
  }
}

TEST_CASE("f statistic") {
  const RngStream rng(36);
  const FStatSummary s = f_statistic_experiment(32, 16, 200, rng, 4);
  CHECK(s.prob_below_a_one <= 0.25);
  CHECK(std::is_sorted(s.samples.begin(), s.samples.end()));
  const FStatSummary t = f_statistic_experiment(32, 16, 200, rng, 1);
  CHECK(s.samples == t.samples);

  // r = 1: f = |V11| with V11 a coordinate of a uniform unit vector.
  const FStatSummary one = f_statistic_experiment(64, 1, 1000, rng, 2);
  CHECK(one.median == doctest::Approx(0.6745 / 8.0).epsilon(0.2));
  CHECK_THROWS_AS(f_statistic_experiment(8, 8, 10, rng), InvalidArgument);
}
