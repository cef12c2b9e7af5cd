#pragma once

#include <variant>

#include "weyl/common.hpp"

namespace weyl {

struct Holomorphic {
  int k = 12;
  bool operator==(const Holomorphic&) const = default;
};

// ell is real, or purely imaginary with |Im ell| <= 1/4 (exceptional range).
struct Maass {
  cplx ell{0.0, 0.0};
  int delta = 0;
  bool operator==(const Maass&) const = default;
};

using GammaFactorKind = std::variant<Holomorphic, Maass>;

void validate_kind(const GammaFactorKind& kind);

// log Gamma(z), correct modulo 2 pi i. Throws PoleError at non-positive integers.
cplx log_gamma(cplx z);

// Gamma(z); RangeError when the value is not representable as a double.
cplx complex_gamma(cplx z);

// gamma_k(s) for Holomorphic, C_{ell,delta}(s) for Maass.
// Denominator poles give an exact zero; numerator poles throw PoleError.
cplx gamma_factor(const GammaFactorKind& kind, cplx s);

struct StirlingProfile {
  double tau = 0.0;
  cplx leading_phase;
  cplx residual;
};

// gamma_factor(1 + i tau) = leading_phase * residual, leading_phase = (|tau|/(4 pi e))^{i tau}
// (holomorphic) or (|tau|/(8 pi e))^{i tau} (Maass). Requires |tau| >= 2.
StirlingProfile stirling_profile(const GammaFactorKind& kind, double tau);

// |gamma_factor(sigma + i tau)| / (1 + |tau|^{sigma - 1}).
double gamma_bound_ratio(const GammaFactorKind& kind, double sigma, double tau);

}  // namespace weyl
