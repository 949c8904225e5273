#pragma once

#include <cstdint>

#include "fastla/matrix.hpp"

namespace fastla {

/// Counter-based random stream. Output i is a fixed hash of (key, i), so a
/// stream is a plain value: copies replay the same sequence, and substream(k)
/// derives an independent stream without touching this one.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() noexcept;
  /// Uniform on (0, 1], 53 random bits.
  double next_uniform() noexcept;
  /// Standard normal by Box-Muller; the second variate is cached.
  double next_gaussian() noexcept;

  RngStream substream(std::uint64_t k) const noexcept;

 private:
  RngStream(std::uint64_t seed, std::uint64_t key) noexcept : seed_(seed), key_(key) {}

  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

Matrix gaussian_matrix(Index rows, Index cols, RngStream& rng);

}  // namespace fastla
