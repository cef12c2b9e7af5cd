#pragma once
// Extended-precision reference values, used only by tests.

#include <boost/math/special_functions/bernoulli.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>
#include <complex>

namespace oracle {

using hp_real = boost::multiprecision::cpp_bin_float_50;
using hp_cplx = boost::multiprecision::cpp_complex_50;

inline hp_real hp_pi() { return boost::math::constants::pi<hp_real>(); }

inline std::complex<double> to_double(const hp_cplx& z) {
  return {static_cast<double>(z.real()), static_cast<double>(z.imag())};
}

// Gamma(z) = gamma(z, x) + Gamma(z, x): power series for the lower part,
// continued fraction for the upper. Re z > 0, |Im z| up to ~30.
inline hp_cplx gamma_split(const hp_cplx& z) {
  const hp_real x = 40 + 2 * static_cast<double>(abs(z));
  const hp_cplx pre = exp(z * log(hp_cplx(x)) - hp_cplx(x));
  const hp_real eps = hp_real("1e-55");

  hp_cplx term = hp_cplx(1) / z, lower = term;
  for (int n = 1; n < 100000; ++n) {
    term *= hp_cplx(x) / (z + hp_cplx(n));
    lower += term;
    if (abs(term) < eps * abs(lower)) break;
  }

  // Modified Lentz for Gamma(z, x) = pre / (x + 1 - z - 1(1-z)/(x + 3 - z - ...)).
  const hp_real tiny = hp_real("1e-300");
  hp_cplx b = hp_cplx(x + 1) - z;
  hp_cplx c = hp_cplx(1) / hp_cplx(tiny);
  hp_cplx d = hp_cplx(1) / b;
  hp_cplx h = d;
  for (int i = 1; i < 100000; ++i) {
    const hp_cplx an = -hp_cplx(i) * (hp_cplx(i) - z);
    b += hp_cplx(2);
    d = an * d + b;
    if (abs(d) < tiny) d = hp_cplx(tiny);
    c = b + an / c;
    if (abs(c) < tiny) c = hp_cplx(tiny);
    d = hp_cplx(1) / d;
    const hp_cplx del = d * c;
    h *= del;
    if (abs(del - hp_cplx(1)) < eps) break;
  }
  return pre * (lower + h);
}

// log Gamma(z) by the Stirling series with many terms, for |z| >= 60.
inline hp_cplx log_gamma_stirling(const hp_cplx& z) {
  hp_cplx sum = 0;
  const hp_cplx inv2 = hp_cplx(1) / (z * z);
  hp_cplx pw = hp_cplx(1) / z;
  for (int k = 1; k <= 40; ++k) {
    const hp_real b = boost::math::bernoulli_b2n<hp_real>(k);
    sum += pw * hp_cplx(b / (hp_real(2 * k) * hp_real(2 * k - 1)));
    pw *= inv2;
  }
  return (z - hp_cplx(hp_real(0.5))) * log(z) - z + hp_cplx(log(2 * hp_pi()) / 2) + sum;
}

}  // namespace oracle

namespace oracle {

// Fresnel integrals C(z) + i S(z) = integral_0^z exp(i pi t^2 / 2) dt by power series.
inline hp_cplx fresnel(const hp_real& z) {
  const hp_real a = hp_pi() / 2;
  hp_real c = 0, s = 0;
  hp_real term = z;  // a^{m} z^{2m+1} / m!
  for (int m = 0; m < 400; ++m) {
    const hp_real add = term / (2 * m + 1);
    switch (m % 4) {
      case 0: c += add; break;
      case 1: s += add; break;
      case 2: c -= add; break;
      default: s -= add; break;
    }
    term *= a * z * z / (m + 1);
    if (abs(term) < hp_real("1e-60")) break;
  }
  return hp_cplx(c, s);
}

}  // namespace oracle
