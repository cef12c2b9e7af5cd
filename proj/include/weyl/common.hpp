#pragma once

#include <cmath>
#include <complex>
#include <numbers>

namespace weyl {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

// e(x) = exp(2 pi i x), with the argument reduced mod 1 first.
inline cplx e(double x) {
  const double r = x - std::nearbyint(x);
  return {std::cos(kTwoPi * r), std::sin(kTwoPi * r)};
}

// e(num / den) for integers, reduced exactly before the division.
inline cplx e_frac(long long num, long long den) {
  long long m = num % den;
  if (m < 0) m += den;
  return e(static_cast<double>(m) / static_cast<double>(den));
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

// Serial is the reference path; Parallel uses OpenMP and must agree with it bitwise.
enum class Exec { Serial, Parallel };

}  // namespace weyl
