#include "weyl/specialfn.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "weyl/error.hpp"

namespace weyl {
namespace {

// B_{2k} / (2k (2k - 1)) for k = 1..15.
constexpr std::array<double, 15> kStirlingCoeff = [] {
  constexpr std::array<std::array<double, 2>, 15> b = {{
      {1.0, 6.0},
      {-1.0, 30.0},
      {1.0, 42.0},
      {-1.0, 30.0},
      {5.0, 66.0},
      {-691.0, 2730.0},
      {7.0, 6.0},
      {-3617.0, 510.0},
      {43867.0, 798.0},
      {-174611.0, 330.0},
      {854513.0, 138.0},
      {-236364091.0, 2730.0},
      {8553103.0, 6.0},
      {-23749461029.0, 870.0},
      {8615841276005.0, 14322.0},
  }};
  std::array<double, 15> c{};
  for (int k = 1; k <= 15; ++k) c[k - 1] = b[k - 1][0] / b[k - 1][1] / ((2.0 * k) * (2.0 * k - 1.0));
  return c;
}();

constexpr double kShiftRadius = 12.0;
const double kHalfLog2Pi = 0.5 * std::log(kTwoPi);

bool is_nonpositive_integer(cplx z, double tol) {
  const double scale = std::max(1.0, std::abs(z));
  if (std::abs(z.imag()) > tol * scale) return false;
  const double r = z.real();
  if (r > tol * scale) return false;
  return std::abs(r - std::nearbyint(r)) <= tol * scale;
}

cplx cexpm1(cplx w) {
  const double a = w.real(), b = w.imag();
  const double sb2 = std::sin(0.5 * b);
  return {std::expm1(a) * std::cos(b) - 2.0 * sb2 * sb2, std::exp(a) * std::sin(b)};
}

// log sin(pi z) modulo 2 pi i, without overflow for large |Im z|.
cplx log_sin_pi(cplx z) {
  const double x = z.real(), y = z.imag();
  const double r = x - std::nearbyint(x);
  if (y >= 0.0) {
    // sin(pi z) = e^{-i pi z} (e^{2 pi i z} - 1) / (2i)
    const cplx wm1 = cexpm1(cplx(-kTwoPi * y, kTwoPi * r));
    return cplx(kPi * y, -kPi * x) + std::log(wm1 / cplx(0.0, 2.0));
  }
  // sin(pi z) = e^{i pi z} (1 - e^{-2 pi i z}) / (2i)
  const cplx wm1 = cexpm1(cplx(kTwoPi * y, -kTwoPi * r));
  return cplx(-kPi * y, kPi * x) + std::log(-wm1 / cplx(0.0, 2.0));
}

cplx stirling_series(cplx z) {
  const cplx inv = 1.0 / z;
  const cplx inv2 = inv * inv;
  cplx term = inv;
  cplx sum = 0.0;
  for (double c : kStirlingCoeff) {
    const cplx add = c * term;
    sum += add;
    if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    term *= inv2;
  }
  return (z - 0.5) * std::log(z) - z + kHalfLog2Pi + sum;
}

cplx log_gamma_right(cplx z) {
  // Re z >= 0.5 here.
  if (std::abs(z.imag()) >= kShiftRadius || z.real() >= kShiftRadius) return stirling_series(z);
  const int shift = static_cast<int>(std::ceil(kShiftRadius - z.real()));
  cplx logs = 0.0;
  cplx prod = 1.0;
  for (int j = 0; j < shift; ++j) {
    prod *= (z + static_cast<double>(j));
    if (j % 4 == 3) {
      logs += std::log(prod);
      prod = 1.0;
    }
  }
  logs += std::log(prod);
  return stirling_series(z + static_cast<double>(shift)) - logs;
}

}  // namespace

void validate_kind(const GammaFactorKind& kind) {
  if (const auto* h = std::get_if<Holomorphic>(&kind)) {
    if (h->k < 2 || h->k % 2 != 0) throw PreconditionError("invalid kind: weight must be a positive even integer >= 2");
    return;
  }
  const auto& m = std::get<Maass>(kind);
  if (m.delta != 0 && m.delta != 1) throw PreconditionError("invalid kind: parity must be 0 or 1");
  const bool real_ell = m.ell.imag() == 0.0;
  const bool exceptional = m.ell.real() == 0.0 && std::abs(m.ell.imag()) <= 0.25;
  if (!real_ell && !exceptional)
    throw PreconditionError("invalid kind: ell must be real or purely imaginary with |Im ell| <= 1/4");
}

cplx log_gamma(cplx z) {
  if (is_nonpositive_integer(z, 0.0)) throw PoleError("Gamma pole at a non-positive integer", z);
  if (z.real() < 0.5) {
    const cplx ls = log_sin_pi(z);
    if (!std::isfinite(ls.real())) throw PoleError("Gamma pole at a non-positive integer", z);
    return std::log(kPi) - ls - log_gamma_right(1.0 - z);
  }
  return log_gamma_right(z);
}

cplx complex_gamma(cplx z) {
  const cplx lg = log_gamma(z);
  if (lg.real() > std::log(std::numeric_limits<double>::max()))
    throw RangeError("complex_gamma: |Gamma(z)| overflows double");
  if (lg.real() < std::log(std::numeric_limits<double>::min()))
    throw RangeError("complex_gamma: |Gamma(z)| underflows double");
  return std::polar(std::exp(lg.real()), lg.imag());
}

cplx gamma_factor(const GammaFactorKind& kind, cplx s) {
  validate_kind(kind);
  constexpr double tol = 1e-13;
  const cplx log2pi_s = -s * std::log(kTwoPi);
  if (const auto* h = std::get_if<Holomorphic>(&kind)) {
    const double kk = 0.5 * (h->k - 1);
    const cplx num = 0.5 * s + kk;
    const cplx den = 1.0 - 0.5 * s + kk;
    if (is_nonpositive_integer(num, tol)) throw PoleError("gamma_factor: numerator pole", s);
    if (is_nonpositive_integer(den, tol)) return 0.0;
    return std::exp(log2pi_s + log_gamma(num) - log_gamma(den));
  }
  const auto& m = std::get<Maass>(kind);
  const cplx il = kI * m.ell;
  const double d = m.delta;
  const cplx n1 = 0.5 * (d + 0.5 * s + il), n2 = 0.5 * (d + 0.5 * s - il);
  const cplx d1 = 0.5 * (1.0 + d - 0.5 * s + il), d2 = 0.5 * (1.0 + d - 0.5 * s - il);
  if (is_nonpositive_integer(n1, tol) || is_nonpositive_integer(n2, tol))
    throw PoleError("gamma_factor: numerator pole", s);
  if (is_nonpositive_integer(d1, tol) || is_nonpositive_integer(d2, tol)) return 0.0;
  return std::exp(log2pi_s + log_gamma(n1) + log_gamma(n2) - log_gamma(d1) - log_gamma(d2));
}

StirlingProfile stirling_profile(const GammaFactorKind& kind, double tau) {
  if (!(std::abs(tau) >= 2.0)) throw PreconditionError("stirling_profile: requires |tau| >= 2");
  const double base = std::holds_alternative<Holomorphic>(kind) ? 4.0 * kPi * std::numbers::e
                                                                : 8.0 * kPi * std::numbers::e;
  StirlingProfile p;
  p.tau = tau;
  p.leading_phase = std::polar(1.0, tau * std::log(std::abs(tau) / base));
  p.residual = gamma_factor(kind, cplx(1.0, tau)) / p.leading_phase;
  return p;
}

double gamma_bound_ratio(const GammaFactorKind& kind, double sigma, double tau) {
  return std::abs(gamma_factor(kind, cplx(sigma, tau))) / (1.0 + std::pow(std::abs(tau), sigma - 1.0));
}

}  // namespace weyl
