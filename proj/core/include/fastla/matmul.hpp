#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fastla/matrix.hpp"
#include "fastla/random.hpp"

namespace fastla {

/// Scalar multiply/add tallies. Padding zeros introduced by Strassen on odd
/// sizes are counted like any other operand, since the arithmetic is done.
struct OpCounter {
  std::uint64_t scalar_mults = 0;
  std::uint64_t scalar_adds = 0;

  void reset() noexcept { scalar_mults = scalar_adds = 0; }
};

enum class EngineKind { conventional, strassen, blocked };

struct MmEngine {
  EngineKind kind = EngineKind::conventional;
  Index cutoff = 64;  // strassen: sizes <= cutoff go to the conventional kernel
  Index block = 64;   // blocked: tile edge
  OpCounter* counter = nullptr;

  static MmEngine conventional(OpCounter* c = nullptr) { return {EngineKind::conventional, 64, 64, c}; }
  static MmEngine strassen(Index cutoff = 64, OpCounter* c = nullptr) { return {EngineKind::strassen, cutoff, 64, c}; }
  static MmEngine blocked(Index block = 64, OpCounter* c = nullptr) { return {EngineKind::blocked, 64, block, c}; }

  MmEngine with_counter(OpCounter* c) const {
    MmEngine e = *this;
    e.counter = c;
    return e;
  }

  void count(std::uint64_t mults, std::uint64_t adds) const noexcept {
    if (counter) {
      counter->scalar_mults += mults;
      counter->scalar_adds += adds;
    }
  }
};

std::string to_string(EngineKind k);
EngineKind parse_engine_kind(std::string_view s);  // conv|conventional, strassen, blocked

/// C = A * B.
template <class T>
BasicMatrix<T> multiply(const BasicConstRef<T>& a, const BasicConstRef<T>& b, const MmEngine& engine);

inline Matrix multiply(const ConstMatrixRef& a, const ConstMatrixRef& b, const MmEngine& engine = {}) {
  return multiply<double>(a, b, engine);
}

/// C += sign * A * B with sign = +1 or -1; the product is formed by the engine.
template <class T>
void multiply_add(const BasicRef<T>& c, const BasicConstRef<T>& a, const BasicConstRef<T>& b, const MmEngine& engine,
                  int sign);

/// Element-wise C += sign * X, counted as additions.
template <class T>
void accumulate(const BasicRef<T>& c, const BasicConstRef<T>& x, int sign, const MmEngine& engine);

/// Worst-case growth factor mu(n) of the engine in ||C - AB|| <= mu(n) eps ||A|| ||B||:
/// n for the conventional and blocked kernels, and the classical bound
/// (n/n0)^{log2 18} (n0^2 + 6 n0) - 6 n for Winograd's variant with n0 the
/// effective cutoff.
double mu_bound(const MmEngine& engine, Index n);

/// Least-squares slope of log2(count) against log2(n). Sizes must be at least
/// three strictly increasing powers of two.
double fit_exponent(const std::vector<Index>& sizes, const std::vector<double>& counts);

/// Measured rounding behaviour of an engine: the worst observed
/// ||C - AB||_F / (eps ||A||_F ||B||_F) and the exponent c of mu(n) = n^c.
struct ErrorModel {
  double mu_exponent = 0.0;
  double observed_constant = 0.0;
  std::vector<Index> sizes;
  std::vector<double> constants;  // one per size
};

/// Single size: mu_exponent is log(observed_constant)/log(n), clamped at 0.
ErrorModel measure_mm_error(Index n, const MmEngine& engine, Index trials, RngStream& rng);

/// Several sizes: mu_exponent is the fitted slope of log(constant) vs log(n).
ErrorModel measure_mm_error(const std::vector<Index>& sizes, const MmEngine& engine, Index trials, RngStream& rng);

}  // namespace fastla
