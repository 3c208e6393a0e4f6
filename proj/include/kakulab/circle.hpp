#pragma once

#include <cmath>
#include <cstdint>

namespace kakulab {

using u128 = unsigned __int128;

/// A point of the circle R/Z stored as a 128-bit binary fraction.
///
/// Addition wraps modulo 1 exactly, so orbits x + j*alpha never drift no
/// matter how many iterates are taken. Conversions to double keep full
/// relative precision on both sides of the origin: `left()` is the
/// representative in [0,1) and `right()` is 1 - left(), computed from the
/// negated raw value so that points just below 1 do not round to 1.
class CirclePoint {
 public:
  constexpr CirclePoint() = default;

  static constexpr CirclePoint from_raw(u128 raw) {
    CirclePoint p;
    p.raw_ = raw;
    return p;
  }

  /// Reduces x modulo 1.
  static CirclePoint from_double(double x) {
    double frac = x - std::floor(x);
    if (frac >= 1.0) frac = 0.0;
    const double hi_part = std::ldexp(frac, 64);
    const double hi = std::floor(hi_part);
    const double lo = std::ldexp(hi_part - hi, 64);
    const auto h = static_cast<std::uint64_t>(hi);
    const auto l = static_cast<std::uint64_t>(lo);
    return from_raw((static_cast<u128>(h) << 64) | l);
  }

  constexpr u128 raw() const { return raw_; }

  /// Representative in [0,1).
  double left() const { return to_unit(raw_); }

  /// 1 - left(); equals 1 only for the origin.
  double right() const {
    if (raw_ == 0) return 1.0;
    return to_unit(static_cast<u128>(0) - raw_);
  }

  double to_double() const {
    const double v = left();
    return v < 1.0 ? v : std::nextafter(1.0, 0.0);
  }

  /// Circle norm ||x||: distance to the nearest integer, in [0, 1/2].
  double norm() const {
    const u128 neg = static_cast<u128>(0) - raw_;
    return to_unit(raw_ < neg ? raw_ : neg);
  }

  /// Signed representative in [-1/2, 1/2).
  double signed_value() const {
    const u128 half = static_cast<u128>(1) << 127;
    if (raw_ < half) return to_unit(raw_);
    return -to_unit(static_cast<u128>(0) - raw_);
  }

  friend constexpr CirclePoint operator+(CirclePoint a, CirclePoint b) {
    return from_raw(a.raw_ + b.raw_);
  }
  friend constexpr CirclePoint operator-(CirclePoint a, CirclePoint b) {
    return from_raw(a.raw_ - b.raw_);
  }
  friend constexpr CirclePoint operator-(CirclePoint a) {
    return from_raw(static_cast<u128>(0) - a.raw_);
  }
  CirclePoint& operator+=(CirclePoint b) {
    raw_ += b.raw_;
    return *this;
  }
  CirclePoint& operator-=(CirclePoint b) {
    raw_ -= b.raw_;
    return *this;
  }

  /// n*x modulo 1, exact for any integer n.
  friend constexpr CirclePoint operator*(std::int64_t n, CirclePoint x) {
    return from_raw(static_cast<u128>(static_cast<__int128>(n)) * x.raw_);
  }

  friend constexpr bool operator==(CirclePoint a, CirclePoint b) = default;

 private:
  static double to_unit(u128 r) {
    const auto hi = static_cast<std::uint64_t>(r >> 64);
    const auto lo = static_cast<std::uint64_t>(r);
    return static_cast<double>(hi) * 0x1.0p-64 + static_cast<double>(lo) * 0x1.0p-128;
  }

  u128 raw_ = 0;
};

/// Circle distance between two points.
inline double circle_distance(CirclePoint a, CirclePoint b) { return (a - b).norm(); }

}  // namespace kakulab
