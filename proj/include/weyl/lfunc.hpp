#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "weyl/common.hpp"
#include "weyl/forms.hpp"

namespace weyl {

// Even entire weight with G(0) = 1, decaying on vertical lines.
struct AfeWeight {
  std::string name;
  std::function<cplx(cplx)> G;
};

// exp((u / scale)^2).
AfeWeight gaussian_weight(double scale = 4.0);
// cos(u / scale) exp((u / scale)^2).
AfeWeight cosine_gaussian_weight(double scale = 4.0);

struct AfeConfig {
  AfeWeight weight = gaussian_weight();
  double abscissa = 3.0;
  double damping = 1e-20;  // contour nodes stop once |integrand| stays below this
  // 0: the first n >= 3 (1 + |t|) sqrt(M) past which both cutoff weights stay below tail_tol.
  long n_afe = 0;
  double tail_tol = 1e-13;
};

// Lambda(s) = M^{s/2} gamma_inf(s) L(s) = eps(f) conj(Lambda(1 - conj s)) with
// gamma_inf(s) = (2 pi)^{-s} Gamma(s + (k - 1)/2) for weight k, and
// pi^{-s} Gamma((s + delta + i ell)/2) Gamma((s + delta - i ell)/2) for Maass forms.
cplx log_gamma_inf(const GammaFactorKind& kind, cplx s);

// V_s(y) = (1 / 2 pi i) int_{(c)} y^{-u} G(u) gamma_inf(s + u) / gamma_inf(s) du / u.
// Trapezoid rule on Re u = c for y above the transition scale; below it the contour is moved left of u = 0
// and the residue 1 is added, so the integrand never has to cancel a large y^{-c}.
class CutoffWeight {
 public:
  CutoffWeight(const GammaFactorKind& kind, cplx s, const AfeConfig& cfg, double y_max = 1e6);
  cplx operator()(double y) const { return y >= y_switch_ ? right(y) : 1.0 + left(y); }
  cplx right(double y) const { return line(right_, y); }
  cplx left(double y) const { return line(left_, y); }
  double y_switch() const { return y_switch_; }
  std::size_t nodes() const { return right_.w.size() + left_.w.size(); }

 private:
  struct Line {
    double c = 0.0, v0 = 0.0, h = 0.0;
    std::vector<cplx> w;
  };
  Line build(double c, double h) const;
  static cplx line(const Line& l, double y);

  GammaFactorKind kind_;
  cplx s_;
  AfeWeight weight_;
  double damping_;
  cplx log_gamma_s_;
  double y_switch_ = 1.0;
  Line right_, left_;
};

struct AfeValue {
  cplx value, first_sum, second_sum;
  long n_used = 0;
  double tail_estimate = 0.0;  // sum of |terms| over (n_used, 2 n_used], as far as the coefficients reach
};

// L(1/2 + it) = sum lambda(n) n^{-s} V_s(n / sqrt M)
//             + eps(f) M^{1/2 - s} gamma_inf(1 - s) / gamma_inf(s) sum conj(lambda(n)) n^{s - 1} V_{1-s}(n / sqrt M).
// Throws MissingRootNumber without eps(f), RangeError when the coefficients stop before n_afe,
// PreconditionError when an explicit n_afe is below 3 (1 + |t|) sqrt(M).
AfeValue afe_evaluate(const CuspForm& form, double t, const AfeConfig& cfg = {});
cplx afe_value(const CuspForm& form, double t, const AfeConfig& cfg = {});

struct TailReport {
  double t = 0.0;
  std::vector<double> lambda, y, v_abs;  // |V_{1/2+it}(y)| at y = lambda (1 + |t|)
  double slope = 0.0;                    // log-log slope of v_abs against lambda
  bool superpolynomial = false;          // slope <= -3
  double crossover = 0.0;                // last y on a 2^{1/16} ladder with |V| >= 1/2
};

TailReport tail_check(const CuspForm& form, double t, const AfeConfig& cfg = {});

struct ScanRecord {
  double t = 0.0;
  double L_abs = 0.0;
  cplx first_sum, second_sum;
  long n_used = 0;
  double tail_estimate = 0.0;
  bool flagged = false;  // tail_estimate >= 1e-3 L_abs
};

struct GrowthFit {
  std::vector<double> window_t, window_max;  // per window: max |L| and the t where it occurs
  double exponent = 0.0;
  double exponent_stderr = 0.0;
  double band_lo = 0.0, band_hi = 0.0;  // exponent -/+ 2 stderr
};

// Least squares of log(window max) against log(t at the max); samples (sorted by t) are split into
// equal-count windows.
GrowthFit fit_growth(std::span<const double> t, std::span<const double> L_abs, int windows = 10);

struct GrowthReport {
  std::vector<ScanRecord> records;
  GrowthFit fit;
  std::string disclaimer;
};

extern const char* const kGrowthDisclaimer;

// Requires t_grid inside [10, 1000].
GrowthReport growth_scan(const CuspForm& form, std::span<const double> t_grid, const AfeConfig& cfg = {},
                         int windows = 10, Exec exec = Exec::Parallel);

}  // namespace weyl
