#pragma once

#include <vector>

#include "weyl/common.hpp"
#include "weyl/oscillate.hpp"
#include "weyl/testfn.hpp"

namespace weyl {

enum class Regime { NoStationaryPoint, Interior, NearEdge };
const char* to_string(Regime r);

struct StationaryExpansion {
  double x0 = 0.0;
  cplx main_term{0.0, 0.0};
  cplx second_term{0.0, 0.0};
  double predicted_error = 0.0;
  Regime regime = Regime::NoStationaryPoint;
};

// Stationary phase for the integral of g e(f) over [p.a, p.b]; order 1 (main term) or 2 (with correction).
// For f''(x0) < 0 the principal square root gives e(-1/8)/sqrt|f''|.
StationaryExpansion expand_stationary(const PhaseProfile& p, int order);

enum class DaggerMethod { Direct, Asymptotic };

struct DaggerValue {
  double r = 0.0;
  cplx s{0.0, 0.0};
  cplx value{0.0, 0.0};
  DaggerMethod method = DaggerMethod::Direct;
  double abs_error_estimate = 0.0;
  Regime regime = Regime::Interior;
};

// U^dagger(r, s) = integral of W(x) e(-r x) x^{s-1} dx by adaptive quadrature.
DaggerValue u_dagger_direct(const SmoothWindow& W, double r, cplx s, double tol = 1e-13);

// Second-order coefficient U_1. Corrected is what the stationary-phase expansion produces;
// AsDisplayed keeps x^2/4 in front of (U_0/x)' and is retained for comparison only.
enum class U1Form { Corrected, AsDisplayed };

double u0(const SmoothWindow& W, double sigma, double x);
double u1(const SmoothWindow& W, double sigma, double x, U1Form form = U1Form::Corrected);
cplx u_sharp(const SmoothWindow& W, double sigma, double beta, double x, U1Form form = U1Form::Corrected);

// Error constants: |direct - asymptotic| <= C min{|beta|^{-5/2}, |r|^{-5/2}} with a stationary point, and
// |U^dagger| <= C' min{((1+|beta|)/|r|)^3, ((1+|r|)/|beta|)^3} without one. Measured by `calibrate`.
struct FourierMellinCalibration {
  double stationary = 0.0;
  double no_stationary = 0.0;
};
FourierMellinCalibration default_fm_calibration();

// Measures both constants for window W at sigma on the fixed calibration grid:
// stationary: x0 in {1.2, 1.35, 1.5, 1.65, 1.8} (scaled to the support) x beta in {50, 100, 200, 400, 800};
// no stationary point: beta in {200, 1000} x x0 in {-1, 0.2, 8, 30} (scaled), r = beta / (2 pi x0).
FourierMellinCalibration calibrate_fourier_mellin(const SmoothWindow& W, double sigma = 1.0);

// Requires |Im s| >= 20.
DaggerValue u_dagger_asymptotic(const SmoothWindow& W, double r, cplx s, U1Form form = U1Form::Corrected,
                                const FourierMellinCalibration& cal = default_fm_calibration());

// Trapezoid rule in x on the support of W for U^dagger at many (r, s); exact to rounding once the
// node count resolves the oscillation (W is smooth and compactly supported).
class DaggerGrid {
 public:
  DaggerGrid(const SmoothWindow& W, int nodes);
  cplx operator()(double r, cplx s) const;
  const std::vector<double>& x() const { return x_; }
  // h * W(x_i)
  const std::vector<double>& weight() const { return w_; }
  // Nodes needed so that the trapezoid rule resolves |r| and |beta| up to the given sizes.
  static int nodes_for(const SmoothWindow& W, double r_max, double beta_max);

 private:
  std::vector<double> x_, w_;
};

}  // namespace weyl
