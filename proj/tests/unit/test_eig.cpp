#include <algorithm>
#include <cmath>
#include <complex>

#include "doctest.h"
#include "fastla/eig.hpp"
#include "fastla/lu.hpp"
#include "helpers.hpp"

using namespace fastla;
using testutil::eps;

namespace {

// X diag(lambda) X^{-1} with X = orthogonal times a mild upper triangular factor.
Matrix similar_to_diag(const std::vector<double>& lambda, RngStream& rng) {
  const Index n = lambda.size();
  const Matrix q = testutil::random_orthogonal(n, rng);
  Matrix x = multiply(q.view(), Matrix::identity(n).view());
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) x(i, j) += 0.1 * rng.next_gaussian() / std::sqrt(static_cast<double>(n));
  Matrix xd(x);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) xd(i, j) *= lambda[j];
  const Matrix xi = solve_linear(x.view(), Matrix::identity(n).view());
  return multiply(xd.view(), xi.view());
}

double schur_residual(const ConstMatrixRef& a, const SchurResult& s) {
  const Matrix qt = multiply(s.Q.view(), s.T.view());
  const Matrix back = multiply(qt.view(), s.Q.transpose().view());
  return frobenius_distance(back.view(), a);
}

std::vector<double> sorted_real(const std::vector<std::complex<double>>& ev) {
  std::vector<double> r;
  for (const auto& z : ev) r.push_back(z.real());
  std::sort(r.begin(), r.end());
  return r;
}

void check_schur(const ConstMatrixRef& a, const SchurResult& s) {
  const double n = static_cast<double>(a.rows());
  CHECK(is_quasi_upper_triangular(s.T.view()));
  CHECK(orthogonality_defect(s.Q.view()) <= 1e3 * n * n * eps);
  const double bound = 10.0 * static_cast<double>(s.accepted_splits() + 1) * s.split_tol * sum_norm(a);
  CHECK(schur_residual(a, s) <= bound);
}

}  // namespace

TEST_CASE("sign function examples") {
  const SignResult s1 = sign_function(Matrix::from_rows({{2}}).view());
  CHECK(s1.S(0, 0) == doctest::Approx(1.0).epsilon(1e-15));

  const SignResult s2 = sign_function(Matrix::from_rows({{2, 0}, {0, -3}}).view());
  CHECK(s2.S(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s2.S(1, 1) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(s2.S(0, 1) == 0.0);

  CHECK_THROWS_AS(sign_function(Matrix::from_rows({{0, 1}, {-1, 0}}).view()), ConvergenceError);

  RngStream rng(7);
  const std::vector<double> lambda = {3.0, 1.5, 0.5, -0.7, -2.0, -4.0};
  const Matrix a = similar_to_diag(lambda, rng);
  for (SignScaling sc : {SignScaling::none, SignScaling::determinantal}) {
    SignIterConfig cfg;
    cfg.scaling = sc;
    const SignResult s = sign_function(a.view(), cfg);
    // S^2 = I and S commutes with A.
    const Matrix s2m = multiply(s.S.view(), s.S.view());
    CHECK(testutil::rel_dist(s2m.view(), Matrix::identity(6).view()) <= 1e-10);
    const Matrix as = multiply(a.view(), s.S.view()), sa = multiply(s.S.view(), a.view());
    CHECK(frobenius_distance(as.view(), sa.view()) <= 1e-10 * frobenius_norm(a.view()));
    double tr = 0.0;
    for (Index i = 0; i < 6; ++i) tr += s.S(i, i);
    CHECK(tr == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(s.kappa_iter >= 1.0);
  }
  SignIterConfig inv_cfg;
  inv_cfg.inverter = SignInverter::gen_inv;
  const SignResult sg = sign_function(a.view(), inv_cfg);
  const SignResult sl = sign_function(a.view());
  CHECK(testutil::rel_dist(sg.S.view(), sl.S.view()) <= 1e-8);
}

TEST_CASE("moebius maps send the region to the right half-plane") {
  auto scalar = [](const Moebius& m, double z) {
    return m.apply(Matrix::from_rows({{z}}).view())(0, 0);
  };
  CHECK(scalar(Moebius::line(1.0), 3.0) > 0.0);
  CHECK(scalar(Moebius::line(1.0), -3.0) < 0.0);
  CHECK(scalar(Moebius::disk(2.0, 1.0), 2.5) > 0.0);
  CHECK(scalar(Moebius::disk(2.0, 1.0), 3.5) < 0.0);
  CHECK(scalar(Moebius::disk(2.0, 1.0), 0.5) < 0.0);
  CHECK(scalar(SplitRegion::interval(-1.0, 1.0).moebius(), 0.3) > 0.0);
  CHECK(scalar(SplitRegion::interval(-1.0, 1.0).moebius(), 1.3) < 0.0);
  CHECK_THROWS_AS(Moebius(1.0, 2.0, 2.0, 4.0), InvalidArgument);
  CHECK_THROWS_AS(Moebius::disk(0.0, 0.0), InvalidArgument);
}

TEST_CASE("NormA21 recurrence equals the direct sum") {
  RngStream rng(8);
  for (Index n : {2, 3, 7, 20}) {
    Matrix a(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) a(i, j) = std::floor(10.0 * rng.next_gaussian());
    const std::vector<double> p = norm_a21_profile(a.view());
    REQUIRE(p.size() == n - 1);
    for (Index i = 0; i + 1 < n; ++i) {
      double direct = 0.0;
      for (Index j = i + 1; j < n; ++j)
        for (Index k = 0; k <= i; ++k) direct += std::fabs(a(j, k));
      CHECK(p[i] == direct);
    }
  }
  CHECK_THROWS_AS(norm_a21_profile(Matrix(1, 1).view()), DimensionError);
}

TEST_CASE("split_once") {
  RngStream rng(9);
  const Matrix d = Matrix::from_rows({{1, 0}, {0, -1}});
  const SplitResult s = split_once(d.view(), SplitRegion::half_plane(0.0), rng);
  CHECK(s.accepted);
  CHECK(s.r == 1);
  CHECK(s.norm_a21 <= 1e-14);
  CHECK(s.Ahat(0, 0) == doctest::Approx(1.0));
  CHECK(s.Ahat(1, 1) == doctest::Approx(-1.0));

  // Every eigenvalue on one side: nothing to isolate.
  const Matrix pos = Matrix::from_rows({{3, 1, 0}, {0, 2, 1}, {0, 0, 4}});
  const SplitResult none = split_once(pos.view(), SplitRegion::half_plane(0.0), rng);
  CHECK_FALSE(none.accepted);

  // Eigenvalue on the line: the sign iteration fails and is reported.
  const Matrix rot = Matrix::from_rows({{0, 1}, {-1, 0}});
  const SplitResult bad = split_once(rot.view(), SplitRegion::half_plane(0.0), rng);
  CHECK(bad.sign_failed);
  CHECK_FALSE(bad.accepted);

  // A block triangular matrix splits at the planted position.
  const std::vector<double> lambda = {5.0, 4.0, 3.0, -3.0, -4.0};
  const Matrix a = similar_to_diag(lambda, rng);
  const SplitResult sp = split_once(a.view(), SplitRegion::half_plane(0.1), rng);
  CHECK(sp.accepted);
  CHECK(sp.r == 3);
  CHECK(orthogonality_defect(sp.Q.view()) <= 1e-13);
}

TEST_CASE("schur_dandc examples") {
  RngStream rng(10);
  const Matrix d = Matrix::diagonal({3.0, 1.0, -2.0});
  const SchurResult s = schur_dandc(d.view(), rng);
  check_schur(d.view(), s);
  const std::vector<double> ev = sorted_real(schur_eigenvalues(s.T.view()));
  CHECK(ev[0] == doctest::Approx(-2.0));
  CHECK(ev[1] == doctest::Approx(1.0));
  CHECK(ev[2] == doctest::Approx(3.0));

  // Companion matrix of (x^2 + 1)(x - 2) = x^3 - 2x^2 + x - 2.
  const Matrix c = Matrix::from_rows({{2, -1, 2}, {1, 0, 0}, {0, 1, 0}});
  const SchurResult sc = schur_dandc(c.view(), rng);
  check_schur(c.view(), sc);
  const auto evc = schur_eigenvalues(sc.T.view());
  REQUIRE(evc.size() == 3);
  int found_real = 0, found_pair = 0;
  for (const auto& z : evc) {
    if (std::abs(z - std::complex<double>(2.0, 0.0)) < 1e-10) ++found_real;
    if (std::abs(std::abs(z.imag()) - 1.0) < 1e-10 && std::abs(z.real()) < 1e-10) ++found_pair;
  }
  CHECK(found_real == 1);
  CHECK(found_pair == 2);
  CHECK(sc.flags.empty());
}

TEST_CASE("schur_dandc on real spectra and random matrices") {
  RngStream rng(11);
  std::vector<double> lambda;
  for (Index i = 0; i < 24; ++i) lambda.push_back(-3.0 + 0.25 * static_cast<double>(i));
  const Matrix a = similar_to_diag(lambda, rng);
  for (const MmEngine& e : {MmEngine::conventional(), MmEngine::strassen(8)}) {
    const SchurResult s = schur_dandc(a.view(), rng, e);
    check_schur(a.view(), s);
    CHECK(s.flags.empty());
    const std::vector<double> ev = sorted_real(schur_eigenvalues(s.T.view()));
    for (Index i = 0; i < lambda.size(); ++i) CHECK(ev[i] == doctest::Approx(lambda[i]).epsilon(1e-8));
  }

  const Matrix g = gaussian_matrix(32, 32, rng);
  const SchurResult sg = schur_dandc(g.view(), rng);
  check_schur(g.view(), sg);
  CHECK(sg.flags.empty());
  // Eigenvalues agree with the trace and with the determinant from LU.
  std::complex<double> tr = 0.0;
  double logdet = 0.0;
  for (const auto& z : schur_eigenvalues(sg.T.view())) {
    tr += z;
    logdet += std::log(std::abs(z));
  }
  double trace = 0.0;
  for (Index i = 0; i < 32; ++i) trace += g(i, i);
  CHECK(tr.real() == doctest::Approx(trace).epsilon(1e-9));
  CHECK(std::fabs(tr.imag()) <= 1e-9);
  const LuResult lu = lur(g.view());
  double ld = 0.0;
  for (Index i = 0; i < 32; ++i) ld += std::log(std::fabs(lu.U(i, i)));
  CHECK(logdet == doctest::Approx(ld).epsilon(1e-9));
}

TEST_CASE("symmetric_eig") {
  RngStream rng(12);
  const SymEigResult d = symmetric_eig(Matrix::diagonal({2.0, -1.0, 5.0}).view(), rng);
  CHECK(d.values == std::vector<double>{-1.0, 2.0, 5.0});

  const Matrix two = Matrix::from_rows({{2, 1}, {1, 2}});
  const SymEigResult t = symmetric_eig(two.view(), rng);
  CHECK(t.values[0] == doctest::Approx(1.0));
  CHECK(t.values[1] == doctest::Approx(3.0));

  CHECK_THROWS_AS(symmetric_eig(Matrix::from_rows({{1, 2}, {0, 1}}).view(), rng), InvalidArgument);

  for (Index n : {32, 64}) {
    const Matrix a = testutil::random_symmetric(n, rng);
    const SymEigResult e = symmetric_eig(a.view(), rng);
    const EighResult ref = jacobi_eigh(a.view());
    const double anorm = frobenius_norm(a.view());
    for (Index i = 0; i < n; ++i) CHECK(std::fabs(e.values[i] - ref.values[i]) <= 1e3 * n * eps * anorm);
    CHECK(orthogonality_defect(e.Q.view()) <= 1e3 * n * n * eps);
    Matrix qd(e.Q);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) qd(i, j) *= e.values[j];
    const Matrix back = multiply(qd.view(), e.Q.transpose().view());
    CHECK(frobenius_distance(back.view(), a.view()) <= 1e4 * n * eps * anorm);
  }

  // Repeated eigenvalues end in a Jacobi-finished cluster or an exact split.
  const Matrix q = testutil::random_orthogonal(12, rng);
  Matrix qd(q);
  for (Index i = 0; i < 12; ++i)
    for (Index j = 0; j < 12; ++j) qd(i, j) *= (j < 6 ? 1.0 : 2.0);
  Matrix rep = multiply(qd.view(), q.transpose().view());
  for (Index i = 0; i < 12; ++i)
    for (Index j = 0; j < i; ++j) rep(i, j) = rep(j, i);
  const SymEigResult r = symmetric_eig(rep.view(), rng);
  for (Index i = 0; i < 12; ++i) CHECK(r.values[i] == doctest::Approx(i < 6 ? 1.0 : 2.0).epsilon(1e-10));
}

TEST_CASE("svd_via_gram") {
  RngStream rng(13);
  const GramSvdResult d = svd_via_gram(Matrix::diagonal({3.0, 2.0}).view(), rng);
  CHECK(d.s[0] == doctest::Approx(3.0));
  CHECK(d.s[1] == doctest::Approx(2.0));

  const Matrix q = testutil::random_orthogonal(8, rng);
  const GramSvdResult o = svd_via_gram(q.view(), rng);
  for (double s : o.s) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  const Matrix usv = multiply(multiply(o.U.view(), Matrix::diagonal(o.s).view()).view(), o.V.transpose().view());
  CHECK(frobenius_distance(usv.view(), q.view()) <= 1e-12);

  const Matrix a = gaussian_matrix(32, 32, rng);
  const GramSvdResult g = svd_via_gram(a.view(), rng);
  const std::vector<double> ref = singular_values(a.view());
  const double anorm = frobenius_norm(a.view());
  for (Index i = 0; i < 32; ++i) CHECK(std::fabs(g.s[i] - ref[i]) <= 1e3 * 32 * eps * anorm);
  CHECK(std::is_sorted(g.s.rbegin(), g.s.rend()));
  const Matrix back = multiply(multiply(g.U.view(), Matrix::diagonal(g.s).view()).view(), g.V.transpose().view());
  CHECK(frobenius_distance(back.view(), a.view()) <= 1e-10 * anorm);
  CHECK(orthogonality_defect(g.U.view()) <= 1e-11);
  CHECK(orthogonality_defect(g.V.view()) <= 1e-11);
}

TEST_CASE("gershgorin rectangle") {
  const Matrix a = Matrix::from_rows({{1, 2}, {-1, 4}});
  const Rect r = gershgorin_rectangle(a.view());
  CHECK(r.re_lo == -1.0);
  CHECK(r.re_hi == 5.0);
  CHECK(r.im_hi == 2.0);
  CHECK(r.im_lo == -2.0);
}

TEST_CASE("evecr examples") {
  const Matrix t = Matrix::from_rows({{2, 1}, {0, 3}});
  const EvecResult e = evecr(t.view());
  CHECK(e.V(0, 0) == 1.0);
  CHECK(e.V(1, 0) == 0.0);
  CHECK(std::fabs(e.V(0, 1)) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(std::fabs(e.V(1, 1)) == doctest::Approx(1.0 / std::sqrt(2.0)));

  const Matrix d = Matrix::diagonal({1.0, 2.0, 3.0, 4.0, 5.0});
  const EvecResult ed = evecr(d.view());
  CHECK(ed.V == Matrix::identity(5));

  CHECK_THROWS_AS(evecr(Matrix::from_rows({{1, 1}, {0, 1}}).view()), SingularMatrixError);
  CHECK_THROWS_AS(evecr(Matrix::from_rows({{1, 0, 0}, {1, 2, 0}, {1, 1, 3}}).view()), InvalidArgument);

  // A 2x2 bump keeps a basis of its invariant pair.
  const Matrix q = Matrix::from_rows({{1, 2, 0.5}, {-2, 1, 0.3}, {0, 0, 4}});
  const EvecResult eq = evecr(q.view());
  for (double r : evec_residuals(q.view(), eq.V.view())) CHECK(r <= 1e-14);
}

TEST_CASE("evecr on random triangular matrices") {
  RngStream rng(14);
  for (Index n : {32, 64}) {
    Matrix t(n, n);
    for (Index i = 0; i < n; ++i) {
      t(i, i) = static_cast<double>(i) / static_cast<double>(n) * 4.0 + 0.1 * rng.next_uniform();
      for (Index j = i + 1; j < n; ++j) t(i, j) = 0.1 * rng.next_gaussian();
    }
    const EvecResult e = evecr(t.view(), MmEngine::strassen(8));
    for (Index j = 0; j < n; ++j) {
      double s = 0.0;
      for (Index i = 0; i < n; ++i) s += e.V(i, j) * e.V(i, j);
      CHECK(std::sqrt(s) == doctest::Approx(1.0).epsilon(1e-14));
    }
    const double tn = frobenius_norm(t.view());
    for (double r : evec_residuals(t.view(), e.V.view())) CHECK(r / tn <= e.err.predicted_evec_bound);
    CHECK(e.err.s_floor > 0.0);
    // Same vectors as back substitution, up to sign.
    const Matrix c = conventional_eigenvectors(t.view());
    for (Index j = 0; j < n; ++j) {
      double dot = 0.0;
      for (Index i = 0; i < n; ++i) dot += e.V(i, j) * c(i, j);
      CHECK(std::fabs(std::fabs(dot) - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("evecr operation count grows like matrix multiplication") {
  RngStream rng(15);
  std::vector<Index> sizes;
  std::vector<double> counts;
  for (Index n : {64, 128, 256, 512}) {
    Matrix t(n, n);
    for (Index i = 0; i < n; ++i) {
      t(i, i) = static_cast<double>(i) + 1.0;
      for (Index j = i + 1; j < n; ++j) t(i, j) = rng.next_gaussian();
    }
    OpCounter ops;
    EvecConfig cfg;
    cfg.compute_sep = false;
    evecr(t.view(), MmEngine::strassen(16, &ops), cfg);
    sizes.push_back(n);
    counts.push_back(static_cast<double>(ops.scalar_mults));
  }
  const double slope = fit_exponent(sizes, counts);
  MESSAGE("evecr exponent " << slope);
  CHECK(slope <= 3.0);
  CHECK(slope >= 2.5);
}
