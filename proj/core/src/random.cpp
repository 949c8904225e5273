#include "fastla/random.hpp"

#include <cmath>
#include <numbers>

namespace fastla {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed) noexcept : seed_(seed), key_(mix64(seed + kGolden)) {}

std::uint64_t RngStream::next_u64() noexcept {
  // Two rounds so neighbouring keys do not produce correlated outputs.
  return mix64(mix64(key_ ^ (++counter_ * kGolden)) + key_);
}

double RngStream::next_uniform() noexcept {
  return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double RngStream::next_gaussian() noexcept {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  cached_ = r * std::sin(t);
  has_cached_ = true;
  return r * std::cos(t);
}

RngStream RngStream::substream(std::uint64_t k) const noexcept {
  return RngStream(seed_, mix64(key_ ^ mix64(k + 0x632be59bd9b4e019ULL)));
}

Matrix gaussian_matrix(Index rows, Index cols, RngStream& rng) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.next_gaussian();
  return m;
}

}  // namespace fastla
