#pragma once

#include <string>
#include <vector>

#include "weyl/common.hpp"
#include "weyl/forms.hpp"
#include "weyl/specialfn.hpp"
#include "weyl/statphase.hpp"
#include "weyl/testfn.hpp"

namespace weyl {

// int e(xi x) V(x) dx.
cplx window_fourier(const SmoothWindow& V, double xi, double tol = 1e-14);

// (1/q) sum_{alpha mod q} e(n alpha / q) int e(n x / X) V(x) dx, evaluated as [q | n] int e(n x / X) V(x) dx.
// Requires q > X^{1+eps}, X > 1, q >= 1.
cplx trivial_delta(long n, long q, double X, const SmoothWindow& V, double eps = 0.1);
// Same, with the additive character sum carried out term by term.
cplx trivial_delta_expanded(long n, long q, double X, const SmoothWindow& V, double eps = 0.1);

struct PipelineConfig {
  double N = 50.0;
  double t = 10.0;
  double K = 5.0;
  std::vector<long> primes;  // the prime set, all in [P, 2P] and coprime to the level
  double P = 0.0;
  long c = 1;                // 1 or a member of primes
  double eps = 0.1;
  // Truncations; 0 picks them from trunc_tol (see dual_identity_check and i_delta_direct).
  double tau_cut = 0.0;
  long r_cut = 0;
  long n_cut = 0;
  double trunc_tol = 1e-15;
  double dtau = 0.0;         // 0: 0.5 holomorphic, 2 pi / 37 Maass
  double tol = 1e-8;
  double max_terms = 5e8;    // guard on the size of the double sums
};

// Primes in [P, 2P] coprime to M. Throws PreconditionError when P <= N^{1+eps} / K or the set is empty.
PipelineConfig make_pipeline(double N, double t, double K, double P, int level = 1, double eps = 0.1);
void validate_pipeline(const PipelineConfig& cfg, int level = 1);

// (1/P*) sum_p (1/p) sum_{alpha mod p} e((r - n) alpha / p) int e(K (r - n) x / N) V(x) dx, closed form.
cplx averaged_delta(long r, long n, const PipelineConfig& cfg, const SmoothWindow& V);
cplx averaged_delta_expanded(long r, long n, const PipelineConfig& cfg, const SmoothWindow& V);

// sum_r lambda(r) r^{-it} V(r / N).
cplx s_direct(const CuspForm& form, double N, double t, Exec exec = Exec::Parallel);

struct SplitResult {
  cplx s{0.0, 0.0};         // s_direct
  cplx s_double{0.0, 0.0};  // U, V double sum with averaged_delta in place of the diagonal
  cplx s_star{0.0, 0.0};
  cplx s_flat{0.0, 0.0};
  double residual = 0.0;       // |s_double - s_star - s_flat| / (1 + |s_double|)
  double delta_error = 0.0;    // |s - s_double|, the error of the delta expansion itself
  double terms = 0.0;
};

// Throws BudgetExceeded when the character sums need more than cfg.max_terms products.
SplitResult s_split(const CuspForm& form, const PipelineConfig& cfg, Exec exec = Exec::Parallel);

struct IDeltaValue {
  cplx value{0.0, 0.0};
  double tau_cut = 0.0;
  double doubled_change = 0.0;  // |value(2 tau_cut) - value|
  std::string warning;
};

// I_delta(n, r, c) = (1/2 pi i) int_{(1)} (sqrt(nN)/(c sqrt M))^{-s} G(s) int U^dagger(Nr/c - Kx, 1 - it)
// V^dagger(Kx, 1 - s/2) V(x) dx ds with G = C_{ell,delta} (Maass) or gamma_k (holomorphic, delta = 0).
IDeltaValue i_delta_direct(long n, long r, long c, const GammaFactorKind& kind, int delta, const PipelineConfig& cfg,
                           int level = 1);

// I*(r, c, 1 + i tau) = int U^dagger(Nr/c - Kx, 1 - it) V^dagger(Kx, 1/2 - i tau/2) V(x) dx.
cplx i_star_direct(long r, long c, double tau, const PipelineConfig& cfg);

struct IStarMain {
  cplx value{0.0, 0.0};
  double x0 = 0.0;
  double f2 = 0.0;  // f''(x0)
  Regime regime = Regime::NoStationaryPoint;
};

// Main term of I* from one stationary point in x: U^dagger and V^dagger replaced by their Fourier-Mellin
// asymptotics, then g(x0) e(f(x0) +- 1/8) / sqrt|f''(x0)| with x0 = N r tau / ((tau + 2t) K c).
// Requires K < t^{1 - eps}, t >= 20, 40 <= |tau| < 2t and K^{1 - eps} < |tau| < 16 pi K t^eps (PreconditionError).
IStarMain i_star_main(long r, long c, double tau, const PipelineConfig& cfg);

// The holomorphic I(n, r, c) with the tau-integral done in closed form: (1/2 pi i) int_{(1)} z^{-s} gamma_k(s) ds
// = 2 J_{k-1}(4 pi z), so I = 2 int int V(x) U^dagger(Nr/c - Kx, 1 - it) V(u) e(-Kxu) J_{k-1}(4 pi Y sqrt u) du dx
// with Y = sqrt(nN)/(c sqrt M).
cplx i_delta_bessel(long n, long r, long c, int k, const PipelineConfig& cfg, int level = 1);

struct DualIdentityReport {
  cplx direct{0.0, 0.0};
  cplx dual{0.0, 0.0};
  double residual = 0.0;  // |direct - dual| / max(|direct|, 1e-300)
  cplx dual_doubled{0.0, 0.0};
  double doubled_change = 0.0;  // relative change when n_cut and r_cut both double
  bool stable = false;          // doubled_change < residual / 2
  long n_cut = 0, r_cut = 0;
  double n_envelope = 0.0;  // octave envelope of |I(n)| at n_cut over its peak (0 when n_cut was given)
  std::string warning;      // set when n_cut had to be clipped to the stored coefficients
};

// S_c(N) directly (finite sums and the x-integral) and after Voronoi in n and Poisson in r. Holomorphic forms only.
// The dual form is
//   pi i^k eta chi(-c) N^{2-it} / (P* c sqrt M) (sum_p 1/p) sum_n lambda(n) sum_{(r,c)=1} e(-conj(rM) n / c) I(n, r, c)
// with I from i_delta_bessel, so there is no tau truncation. n_cut and r_cut left at 0 are taken where the measured
// envelopes of |I| in n and of |U^dagger| in r fall below trunc_tol times their peaks. Both runs of the doubling
// test share one set of quadrature nodes. Throws TruncationInsufficient when the envelope does not fall within
// the r node range and RangeError when the form has fewer than 2 n_cut coefficients; an n_cut that would need more
// coefficients than the form stores is clipped, with a warning.
DualIdentityReport dual_identity_check(const CuspForm& form, const PipelineConfig& cfg, bool with_doubling = true,
                                       Exec exec = Exec::Parallel);

// S_c(N) by the dual form only.
cplx s_c_dual(const CuspForm& form, const PipelineConfig& cfg, Exec exec = Exec::Parallel);
cplx s_c_direct(const CuspForm& form, const PipelineConfig& cfg);

}  // namespace weyl
