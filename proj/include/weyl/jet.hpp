#pragma once

#include <array>
#include <cassert>

namespace weyl {

// Truncated Taylor expansion a_0 + a_1 e + ... + a_n e^n about a point.
// Used to push exact derivatives through products, quotients and compositions.
struct Jet {
  static constexpr int kMax = 10;
  int n = 0;
  std::array<double, kMax + 1> a{};

  Jet() = default;
  explicit Jet(int order) : n(order) { assert(order <= kMax); }

  static Jet constant(double v, int order) {
    Jet j(order);
    j.a[0] = v;
    return j;
  }
  static Jet variable(double x0, int order) {
    Jet j(order);
    j.a[0] = x0;
    if (order >= 1) j.a[1] = 1.0;
    return j;
  }
  // From derivative values d[0..order].
  template <class D>
  static Jet from_derivatives(const D& d, int order) {
    Jet j(order);
    double fact = 1.0;
    for (int k = 0; k <= order; ++k) {
      if (k > 0) fact *= k;
      j.a[k] = d[k] / fact;
    }
    return j;
  }

  double value() const { return a[0]; }
  double derivative(int k) const {
    double fact = 1.0;
    for (int i = 2; i <= k; ++i) fact *= i;
    return a[k] * fact;
  }

  Jet& operator+=(const Jet& o) {
    for (int k = 0; k <= n; ++k) a[k] += o.a[k];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (int k = 0; k <= n; ++k) a[k] -= o.a[k];
    return *this;
  }
  Jet& operator*=(double s) {
    for (int k = 0; k <= n; ++k) a[k] *= s;
    return *this;
  }
};

inline Jet operator+(Jet x, const Jet& y) { return x += y; }
inline Jet operator-(Jet x, const Jet& y) { return x -= y; }
inline Jet operator*(Jet x, double s) { return x *= s; }
inline Jet operator*(double s, Jet x) { return x *= s; }
inline Jet operator+(Jet x, double s) {
  x.a[0] += s;
  return x;
}

inline Jet operator*(const Jet& x, const Jet& y) {
  Jet r(x.n < y.n ? x.n : y.n);
  for (int k = 0; k <= r.n; ++k) {
    double s = 0.0;
    for (int i = 0; i <= k; ++i) s += x.a[i] * y.a[k - i];
    r.a[k] = s;
  }
  return r;
}

inline Jet operator/(const Jet& x, const Jet& y) {
  Jet r(x.n < y.n ? x.n : y.n);
  for (int k = 0; k <= r.n; ++k) {
    double s = x.a[k];
    for (int i = 1; i <= k; ++i) s -= y.a[i] * r.a[k - i];
    r.a[k] = s / y.a[0];
  }
  return r;
}

// outer(inner) where outer_d[m] is the m-th derivative of the outer function at inner.value().
template <class D>
Jet compose(const D& outer_d, const Jet& inner) {
  const int n = inner.n;
  Jet delta = inner;
  delta.a[0] = 0.0;
  Jet r = Jet::constant(outer_d[0], n);
  Jet pw = Jet::constant(1.0, n);
  double fact = 1.0;
  for (int m = 1; m <= n; ++m) {
    pw = pw * delta;
    fact *= m;
    const double c = outer_d[m] / fact;
    for (int k = 0; k <= n; ++k) r.a[k] += c * pw.a[k];
  }
  return r;
}

}  // namespace weyl
