#pragma once

// Double-word ("double-double") arithmetic on binary64 pairs.
//
// A DoubleWord represents the unevaluated sum hi + lo with |lo| <= ulp(hi)/2.
// The kernels follow the error-free transformations of Dekker and Knuth with
// the fma-based products of Joldes, Muller and Popescu (2017); relative error
// of each operation is a small multiple of 2^-104.

#include <cmath>
#include <limits>

namespace fastla {

namespace dw_detail {

inline void two_sum(double a, double b, double& s, double& e) noexcept {
  s = a + b;
  const double t = s - a;
  e = (a - (s - t)) + (b - t);
}

// Requires |a| >= |b| (or a == 0).
inline void fast_two_sum(double a, double b, double& s, double& e) noexcept {
  s = a + b;
  e = b - (s - a);
}

inline void two_prod(double a, double b, double& p, double& e) noexcept {
  p = a * b;
  e = std::fma(a, b, -p);
}

}  // namespace dw_detail

struct DoubleWord {
  double hi = 0.0;
  double lo = 0.0;

  constexpr DoubleWord() = default;
  constexpr DoubleWord(double h) : hi(h), lo(0.0) {}  // NOLINT: implicit widening is intended
  constexpr DoubleWord(double h, double l) : hi(h), lo(l) {}

  /// Nearest binary64 value.
  constexpr double to_double() const noexcept { return hi + lo; }

  DoubleWord& operator+=(const DoubleWord& y) noexcept;
  DoubleWord& operator-=(const DoubleWord& y) noexcept;
  DoubleWord& operator*=(const DoubleWord& y) noexcept;
  DoubleWord& operator/=(const DoubleWord& y) noexcept;
};

inline DoubleWord operator-(const DoubleWord& x) noexcept { return {-x.hi, -x.lo}; }

inline DoubleWord operator+(const DoubleWord& x, const DoubleWord& y) noexcept {
  double sh, sl, th, tl, vh, vl, zh, zl;
  dw_detail::two_sum(x.hi, y.hi, sh, sl);
  dw_detail::two_sum(x.lo, y.lo, th, tl);
  const double c = sl + th;
  dw_detail::fast_two_sum(sh, c, vh, vl);
  const double w = tl + vl;
  dw_detail::fast_two_sum(vh, w, zh, zl);
  return {zh, zl};
}

inline DoubleWord operator-(const DoubleWord& x, const DoubleWord& y) noexcept { return x + (-y); }

inline DoubleWord operator*(const DoubleWord& x, const DoubleWord& y) noexcept {
  double ch, cl1, zh, zl;
  dw_detail::two_prod(x.hi, y.hi, ch, cl1);
  const double tl0 = x.lo * y.lo;
  const double tl1 = std::fma(x.hi, y.lo, tl0);
  const double cl2 = std::fma(x.lo, y.hi, tl1);
  const double cl3 = cl1 + cl2;
  dw_detail::fast_two_sum(ch, cl3, zh, zl);
  return {zh, zl};
}

inline DoubleWord mul_double(const DoubleWord& x, double y) noexcept {
  double ch, cl1, zh, zl;
  dw_detail::two_prod(x.hi, y, ch, cl1);
  const double cl3 = std::fma(x.lo, y, cl1);
  dw_detail::fast_two_sum(ch, cl3, zh, zl);
  return {zh, zl};
}

inline DoubleWord operator/(const DoubleWord& x, const DoubleWord& y) noexcept {
  const double th = x.hi / y.hi;
  const DoubleWord r = mul_double(y, th);
  const double pi_h = x.hi - r.hi;
  const double delta_l = x.lo - r.lo;
  const double delta = pi_h + delta_l;
  const double tl = delta / y.hi;
  double zh, zl;
  dw_detail::fast_two_sum(th, tl, zh, zl);
  return {zh, zl};
}

inline DoubleWord& DoubleWord::operator+=(const DoubleWord& y) noexcept { return *this = *this + y; }
inline DoubleWord& DoubleWord::operator-=(const DoubleWord& y) noexcept { return *this = *this - y; }
inline DoubleWord& DoubleWord::operator*=(const DoubleWord& y) noexcept { return *this = *this * y; }
inline DoubleWord& DoubleWord::operator/=(const DoubleWord& y) noexcept { return *this = *this / y; }

inline bool operator==(const DoubleWord& x, const DoubleWord& y) noexcept {
  return x.hi == y.hi && x.lo == y.lo;
}
inline bool operator<(const DoubleWord& x, const DoubleWord& y) noexcept {
  return x.hi < y.hi || (x.hi == y.hi && x.lo < y.lo);
}
inline bool operator>(const DoubleWord& x, const DoubleWord& y) noexcept { return y < x; }
inline bool operator<=(const DoubleWord& x, const DoubleWord& y) noexcept { return !(y < x); }
inline bool operator>=(const DoubleWord& x, const DoubleWord& y) noexcept { return !(x < y); }

// Unqualified abs/sqrt/isfinite inside namespace fastla resolve here for both
// scalar types.
inline double abs(double x) noexcept { return std::fabs(x); }
inline double sqrt(double x) noexcept { return std::sqrt(x); }
inline bool isfinite(double x) noexcept { return std::isfinite(x); }

inline DoubleWord abs(const DoubleWord& x) noexcept { return x.hi < 0.0 ? -x : x; }

inline DoubleWord sqrt(const DoubleWord& x) noexcept {
  if (x.hi <= 0.0) return DoubleWord(std::sqrt(x.hi));
  const double s = std::sqrt(x.hi);
  double p, e, zh, zl;
  dw_detail::two_prod(s, s, p, e);
  const double r = ((x.hi - p) - e + x.lo) / (2.0 * s);
  dw_detail::fast_two_sum(s, r, zh, zl);
  return {zh, zl};
}

inline bool isfinite(const DoubleWord& x) noexcept { return std::isfinite(x.hi) && std::isfinite(x.lo); }

/// Scalar traits shared by the templated kernels.
template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
  static constexpr double unit_roundoff = std::numeric_limits<double>::epsilon() / 2;
  static double to_double(double x) noexcept { return x; }
};

template <>
struct ScalarTraits<DoubleWord> {
  // 2^-104, a conservative bound for the accurate double-word kernels above.
  static constexpr double unit_roundoff = 4.930380657631324e-32;
  static double to_double(const DoubleWord& x) noexcept { return x.to_double(); }
};

inline double to_double(double x) noexcept { return x; }
inline double to_double(const DoubleWord& x) noexcept { return x.to_double(); }

}  // namespace fastla
