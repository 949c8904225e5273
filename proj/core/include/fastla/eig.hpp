#pragma once

// Spectral divide and conquer with the matrix sign function, its symmetric and
// SVD specializations, and divide-and-conquer eigenvectors of a Schur form.

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "fastla/matmul.hpp"
#include "fastla/random.hpp"
#include "fastla/report.hpp"

namespace fastla {

enum class SignScaling { none, determinantal };
enum class SignInverter { lu, gen_inv };

struct SignIterConfig {
  int max_iters = 100;
  double conv_tol = 1.4901161193847656e-08;  // sqrt(eps), on ||A_{i+1} - A_i||_1 / ||A_i||_1
  SignScaling scaling = SignScaling::none;
  SignInverter inverter = SignInverter::lu;
};

struct SignResult {
  Matrix S;
  int iterations = 0;
  double kappa_iter = 1.0;  // max 1-norm condition number over the iterates
};

/// Newton iteration A <- (A + A^{-1}) / 2. Throws ConvergenceError when the
/// step does not fall below conv_tol within max_iters or an iterate is
/// singular, which is what happens with eigenvalues on the imaginary axis.
SignResult sign_function(const ConstMatrixRef& a, const SignIterConfig& cfg = {}, const MmEngine& engine = {});

/// (alpha A + beta I)(gamma A + delta I)^{-1}.
struct Moebius {
  double alpha = 1.0, beta = 0.0, gamma = 0.0, delta = 1.0;

  Moebius(double a, double b, double c, double d);
  /// Maps the line Re z = c to the imaginary axis, right side to the right.
  static Moebius line(double c);
  /// Maps the circle |z - center| = radius to the imaginary axis, inside to the right.
  static Moebius disk(double center, double radius);
  Matrix apply(const ConstMatrixRef& a, const MmEngine& engine = {}) const;
};

/// Which eigenvalues a split isolates in the leading block. Disks and
/// intervals are centered on the real axis so that iterates stay real.
struct SplitRegion {
  enum class Kind { half_plane, disk, real_interval };
  Kind kind = Kind::half_plane;
  double a = 0.0;  // half_plane: line Re z = a; disk: center; interval: lower end
  double b = 0.0;  // disk: radius; interval: upper end

  static SplitRegion half_plane(double c) { return {Kind::half_plane, c, 0.0}; }
  static SplitRegion disk(double center, double radius) { return {Kind::disk, center, radius}; }
  static SplitRegion interval(double lo, double hi) { return {Kind::real_interval, lo, hi}; }
  Moebius moebius() const;
  std::string describe() const;
};

struct SplitConfig {
  int max_attempts = 3;
  double split_tol = 0.0;  // 0 selects 1e3 n eps
  bool symmetric = false;
  SignIterConfig sign{40};
};

struct SplitResult {
  Matrix Q;      // orthogonal, leading r columns span the isolated subspace
  Index r = 0;
  Matrix Ahat;   // Q^T A Q
  bool accepted = false;
  double norm_a21 = 0.0;  // ||Ahat(r+1:n, 1:r)||_S
  int attempts = 0;
  int sign_iterations = 0;
  bool sign_failed = false;
  std::optional<Index> inside;  // rounded trace of the projector, empty when the sign failed
};

/// NormA21(i) = sum_{j > i, k <= i} |A_jk| for i = 1..n-1 (index i-1 of the
/// result) by the ColSum/RowSum recurrence, O(n^2).
std::vector<double> norm_a21_profile(const ConstMatrixRef& a);

/// One spectral split: sign of the Moebius-mapped matrix, projector
/// (S + I)/2, Q from rurv of the projector, rank chosen by minimizing
/// NormA21, retried with fresh randomness until accepted or out of attempts.
SplitResult split_once(const ConstMatrixRef& a, const SplitRegion& region, RngStream& rng,
                       const MmEngine& engine = {}, const SplitConfig& cfg = {});

struct SchurConfig {
  SplitConfig split;
  int max_candidates = 12;  // fixed regions tried per block
  int bisection_steps = 30; // then count-guided bisection steps per region family
};

struct SplitNode {
  Index lo = 0, size = 0, r = 0;
  std::string region;
  double norm_a21 = 0.0;
  int attempts = 0;
  int sign_iterations = 0;
  bool accepted = false;
};

struct SchurResult {
  Matrix Q;
  Matrix T;  // quasi-upper-triangular, or with flagged unsplit cluster blocks
  std::vector<SplitNode> tree;
  std::vector<std::string> flags;
  double split_tol = 0.0;
  Index accepted_splits() const;
};

/// Real Schur form A = Q T Q^T by recursive spectral splitting.
SchurResult schur_dandc(const ConstMatrixRef& a, RngStream& rng, const MmEngine& engine = {},
                        const SchurConfig& cfg = {});

/// Eigenvalues of T's diagonal blocks: 1x1 entries, 2x2 bumps and, for an
/// unsplit larger block, the eigenvalues of that block by the Jacobi oracle
/// when it is symmetric or its mean otherwise.
std::vector<std::complex<double>> schur_eigenvalues(const ConstMatrixRef& t);

struct SymEigResult {
  Matrix Q;                    // eigenvectors in columns
  std::vector<double> values;  // ascending
  std::vector<SplitNode> tree;
  std::vector<std::string> flags;
};

/// Symmetric specialization: every compressed block is re-symmetrized and the
/// result is diagonal.
SymEigResult symmetric_eig(const ConstMatrixRef& a, RngStream& rng, const MmEngine& engine = {},
                           const SchurConfig& cfg = {});

struct GramSvdResult {
  Matrix U, V;
  std::vector<double> s;  // descending
  std::vector<std::string> flags;
};

/// SVD from the eigenvectors of A A^T and A^T A (Gram matrices formed in
/// double-word arithmetic), followed by block diagonalization of U^T A V:
/// coupled blocks are resolved by a polar decomposition and a symmetric
/// eigendecomposition of the Hermitian factor.
GramSvdResult svd_via_gram(const ConstMatrixRef& a, RngStream& rng, const MmEngine& engine = {},
                           const SchurConfig& cfg = {});

struct Rect {
  double re_lo = 0.0, re_hi = 0.0, im_lo = 0.0, im_hi = 0.0;
};

/// Bounding box of the union of the row Gershgorin disks.
Rect gershgorin_rectangle(const ConstMatrixRef& a);

struct EigError {
  double s_floor = 0.0;               // min sep over the EVecR splits
  double predicted_evec_bound = 0.0;  // n^{c'} eps (||T||_F / s_floor)^{2 + log2 n}
};

struct EvecConfig {
  bool compute_sep = true;
  double c_prime = 3.0;
};

struct EvecResult {
  Matrix V;  // unit columns; a 2x2 bump contributes a real basis of its invariant pair
  EigError err;
};

/// Eigenvectors of a quasi-triangular T by block diagonalization with SylR.
EvecResult evecr(const ConstMatrixRef& t, const MmEngine& engine = {}, const EvecConfig& cfg = {});

/// Per-column residuals ||T v_i - T_ii v_i||_2; for a 2x2 bump, the Frobenius
/// residual of the pair against its best 2x2 representation, reported on both
/// columns.
std::vector<double> evec_residuals(const ConstMatrixRef& t, const ConstMatrixRef& v);

/// Unit eigenvectors of an upper triangular T by per-vector back
/// substitution, O(n^3) in total.
Matrix conventional_eigenvectors(const ConstMatrixRef& t);

}  // namespace fastla
