#pragma once

#include <string>
#include <string_view>

#include "fastla/double_word.hpp"
#include "fastla/error.hpp"

namespace fastla {

/// Working precision is binary64; extended runs the same kernels on
/// double-word scalars and rounds the final result back to binary64.
enum class Precision { working, extended };

inline double unit_roundoff(Precision p) noexcept {
  return p == Precision::working ? ScalarTraits<double>::unit_roundoff : ScalarTraits<DoubleWord>::unit_roundoff;
}

/// Machine epsilon of the working precision (2^-52).
inline constexpr double kEps = 2.220446049250313e-16;

inline std::string to_string(Precision p) { return p == Precision::working ? "working" : "extended"; }

inline Precision parse_precision(std::string_view s) {
  if (s == "working") return Precision::working;
  if (s == "extended") return Precision::extended;
  throw InvalidArgument("unknown precision '" + std::string(s) + "'");
}

}  // namespace fastla
