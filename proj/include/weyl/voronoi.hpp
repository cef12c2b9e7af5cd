#pragma once

#include <span>
#include <string>
#include <vector>

#include "weyl/common.hpp"
#include "weyl/forms.hpp"
#include "weyl/specialfn.hpp"
#include "weyl/testfn.hpp"

namespace weyl {

// Contour and quadrature parameters for the W-hat transforms. Zero means "choose automatically".
struct ContourOptions {
  double sigma = 0.0;     // 1/2 holomorphic, 0.1 Maass
  double dtau = 0.0;      // trapezoid step along the contour
  double tau_cut = 0.0;   // contour truncation; chosen where |W~ gamma| drops below tail_tol
  int mellin_nodes = 2048;
  double tail_tol = 1e-14;  // relative to the peak; the rounding floor of W~ sits near 1e-16
  double tau_limit = 30000.0;
};

// W-hat^{+-}(y) for a fixed form type and window. The x-Mellin transform
// W~(s) = int W(x) x^{-s/2} dx is tabulated on the contour first, then
// W-hat(y) = prefactor * int_{(sigma)} y^{-s/2} W~(s) Gamma-factor(s) ds.
class VoronoiTransform {
 public:
  VoronoiTransform(const GammaFactorKind& kind, int epsilon_g, const SmoothWindow& W, ContourOptions opt = {},
                   Exec exec = Exec::Parallel);

  // sign = +1 or -1; y > 0. Holomorphic sign -1 is exactly 0.
  cplx operator()(double y, int sign) const;
  void evaluate(std::span<const double> ys, int sign, std::span<cplx> out, Exec exec = Exec::Parallel) const;

  double sigma() const { return sigma_; }
  double dtau() const { return dtau_; }
  double tau_cut() const { return tau_cut_; }
  std::size_t contour_nodes() const { return plus_.size(); }
  // Relative size of the dropped contour tail; warning is non-empty when it exceeds tail_tol.
  double contour_tail() const { return contour_tail_; }
  const std::string& warning() const { return warning_; }
  bool is_zero() const { return zero_; }

  // Smallest y_max such that |W-hat(y)| < tol for y >= y_max on a one-octave envelope, and
  // the integral of that envelope past y_max.
  struct Decay {
    double y_max = 0.0;
    double tail_integral = 0.0;
  };
  Decay decay(double tol, double y_limit = 1e7) const;

 private:
  bool holomorphic_ = true;
  bool zero_ = false;
  double sigma_ = 0.5, dtau_ = 0.25, tau_cut_ = 0.0, contour_tail_ = 0.0;
  std::string warning_;
  // Coefficients at tau_j = j dtau, j >= 0, with the prefactor, i and dtau folded in.
  std::vector<cplx> plus_, minus_;
  cplx pref_plus_{0.0, 0.0}, pref_minus_{0.0, 0.0};
};

// Convenience: builds a transform and evaluates one point.
cplx what_transform(const GammaFactorKind& kind, const SmoothWindow& W, double y, int sign, int epsilon_g = 1);

struct VoronoiInstance {
  const CuspForm* form = nullptr;
  long a = 1;
  long c = 1;
  SmoothWindow W = SmoothWindow::zero({1.0, 2.0});
  double N = 1.0;
  ContourOptions contour;
  long n_cut_rhs = 0;            // 0: from the measured decay of W-hat
  double rhs_tol = 1e-13;        // |W-hat| level at which the dual sum is cut
  bool strip_eta = false;        // rhs without the eta(M) factor
};

struct VoronoiResult {
  cplx lhs{0.0, 0.0};
  cplx rhs{0.0, 0.0};
  double residual = 0.0;
  long n_lhs = 0;
  long n_rhs = 0;
  double rhs_tail_estimate = 0.0;
  double contour_tail = 0.0;
};

// Both sides of the summation formula. Throws PreconditionError when gcd(a, c) > 1 or gcd(c, M) > 1, or when the
// form stores fewer coefficients than the dual sum needs. The transform may be shared across instances with
// the same form type and window.
VoronoiResult voronoi_check(const VoronoiInstance& inst, const VoronoiTransform& T, Exec exec = Exec::Parallel);
VoronoiResult voronoi_check(const VoronoiInstance& inst, Exec exec = Exec::Parallel);

// Coefficient count needed for the dual sum of an instance.
long voronoi_rhs_terms(const VoronoiInstance& inst, const VoronoiTransform& T);

struct EtaCalibration {
  cplx eta{1.0, 0.0};      // modulus-1 least-squares constant
  double raw_modulus = 1.0;  // |unconstrained least-squares fit|
  double spread = 0.0;       // max |lhs/rhs0 - eta| over probes
};

// Fits eta(M) from probes (rhs evaluated without eta). Throws PreconditionError for fewer than two probes and
// ConsistencyError when the probes disagree by more than 1e-3.
EtaCalibration calibrate_eta(std::span<const VoronoiInstance> probes, Exec exec = Exec::Parallel);

}  // namespace weyl
