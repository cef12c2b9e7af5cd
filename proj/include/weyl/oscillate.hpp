#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "weyl/common.hpp"
#include "weyl/jet.hpp"

namespace weyl {

using RealFn = std::function<double(double)>;
using ComplexFn = std::function<cplx(double)>;
// (x, order) -> order-th derivative.
using DerivFn = std::function<double(double, int)>;

struct OscillatoryResult {
  cplx value{0.0, 0.0};
  double abs_error_estimate = 0.0;
  std::size_t cells = 0;
  bool budget_exceeded = false;
};

inline constexpr std::size_t kDefaultCellBudget = 1'000'000;

struct QuadratureOptions {
  std::size_t max_cells = kDefaultCellBudget;
  Exec exec = Exec::Serial;
};

// Process-wide cell ceiling used when a caller does not pass options explicitly.
void set_default_cell_budget(std::size_t cells);
std::size_t default_cell_budget();
QuadratureOptions default_quadrature_options();

// Throws BudgetExceeded when r.budget_exceeded is set.
const OscillatoryResult& require_within_budget(const OscillatoryResult& r);

// Integral of g(x) e(f(x)) over [a, b].
OscillatoryResult integrate_1d(const RealFn& g, const RealFn& f, double a, double b, double tol,
                               const QuadratureOptions& opt = default_quadrature_options());

// Integral of h over [a, b]; `cycles_per_unit` bounds the oscillation rate used to seed the cells.
OscillatoryResult integrate_complex(const ComplexFn& h, double a, double b, double tol, double cycles_per_unit,
                                    const QuadratureOptions& opt = default_quadrature_options());

struct PhaseProfile {
  DerivFn f;  // derivatives to order 4
  DerivFn g;  // derivatives to order 2 (more when j-fold bounds are requested)
  double a = 0.0;
  double b = 1.0;
  double theta_f = 1.0;
  double omega_f = 1.0;
  double omega_g = 1.0;
  double lambda = 1.0;
};

// Smallest c with |f^{(i)}| <= c Theta/Omega^i (i = 1..4) and |g^{(j)}| <= c / Omega_g^j (j = 0..2), by sampling.
double sampled_scale_constant(const PhaseProfile& p, int samples = 513);
// min |f'| over [a, b] by sampling.
double sampled_min_fprime(const PhaseProfile& p, int samples = 1025);

// (2 pi)^{-j} times the integral of |D^j g|, D h = (h / f')'. Bounds |integral of g e(f)| when g
// vanishes to order j at both ends.
double ibp_majorant(const PhaseProfile& p, int j, int samples = 4001);

struct DecayProbeResult {
  std::vector<double> B;
  std::vector<double> integral_abs;
  std::vector<double> bound;
  double bound_slope = 0.0;   // log-log slope of the j-fold majorant; this is the probe's fitted slope
  double actual_slope = 0.0;  // log-log slope of |I| itself
  bool bound_holds = true;    // |I(B)| <= majorant(B) at every B
  bool realized = false;      // bound_slope <= -j + 0.2
};

// family(B) returns a profile with |f'| >= B on [a, b]; throws PreconditionError otherwise.
DecayProbeResult decay_probe(const std::function<PhaseProfile(double)>& family, std::span<const double> B_values,
                             int j, double tol = 1e-13);

struct Rect {
  double x0, x1, y0, y1;
};
using RealFn2 = std::function<double(double, double)>;

// Integral of g2(x, y) e(f2(x, y)) over the rectangle, as an iterated adaptive integral.
OscillatoryResult integrate_2d(const RealFn2& g2, const RealFn2& f2, const Rect& rect, double tol,
                               const QuadratureOptions& opt = default_quadrature_options());

// var(g): integral of |d^2 g / dx dy| over the rectangle (g supported inside it).
double total_variation(const RealFn2& g_xy, const Rect& rect, int samples = 201);

// Checks f_xx >= c r1^2, f_yy >= c r2^2 and f_xx f_yy - f_xy^2 >= c r1 r2 on a sample grid;
// returns the largest admissible c (<= 0 when the condition fails).
double condition_constant(const RealFn2& f_xx, const RealFn2& f_yy, const RealFn2& f_xy, const Rect& rect, double r1,
                          double r2, int samples = 41);

}  // namespace weyl
