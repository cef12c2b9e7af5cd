#include "weyl/statphase.hpp"

#include <algorithm>
#include <cmath>

#include "weyl/error.hpp"

namespace weyl {

const char* to_string(Regime r) {
  switch (r) {
    case Regime::NoStationaryPoint: return "no_stationary_point";
    case Regime::Interior: return "interior";
    case Regime::NearEdge: return "near_edge";
  }
  return "?";
}

namespace {

double find_root(const PhaseProfile& p, double lo, double hi) {
  double flo = p.f(lo, 1);
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (lo + hi);
    if (!(m > lo && m < hi)) break;
    const double fm = p.f(m, 1);
    if (fm == 0.0) return m;
    if ((fm < 0) == (flo < 0)) {
      lo = m;
      flo = fm;
    } else {
      hi = m;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

StationaryExpansion expand_stationary(const PhaseProfile& p, int order) {
  if (order != 1 && order != 2) throw PreconditionError("expand_stationary: order must be 1 or 2");
  constexpr int kS = 4097;
  double gmax = 0.0;
  for (int i = 0; i < kS; ++i) gmax = std::max(gmax, std::abs(p.g(p.a + (p.b - p.a) * i / (kS - 1), 0)));
  if (std::abs(p.g(p.a, 0)) > 1e-12 * gmax || std::abs(p.g(p.b, 0)) > 1e-12 * gmax)
    throw PreconditionError("expand_stationary: g does not vanish at the endpoints");

  const double Th = p.theta_f, Om = p.omega_f, Og = p.omega_g;
  StationaryExpansion out;

  std::vector<double> xs(kS), fp(kS);
  for (int i = 0; i < kS; ++i) {
    xs[i] = p.a + (p.b - p.a) * i / (kS - 1);
    fp[i] = p.f(xs[i], 1);
  }
  int bracket = -1, count = 0;
  for (int i = 0; i + 1 < kS; ++i) {
    if (fp[i] == 0.0 || (fp[i] < 0) != (fp[i + 1] < 0)) {
      if (fp[i] == 0.0 && i > 0 && fp[i - 1] != 0.0 && (fp[i - 1] < 0) != (fp[i + 1] < 0) && bracket == i - 1)
        continue;
      bracket = i;
      ++count;
    }
  }
  if (count == 0) {
    double lam = std::abs(fp[0]);
    for (double v : fp) lam = std::min(lam, std::abs(v));
    out.regime = Regime::NoStationaryPoint;
    out.predicted_error = Th / (Om * Om * lam * lam * lam) * (1.0 + Om / Og + (Om * Om) / (Og * Og) * lam / (Th / Om));
    return out;
  }
  if (count > 1) throw PreconditionError("expand_stationary: more than one stationary point");

  const double x0 = fp[bracket] == 0.0 ? xs[bracket] : find_root(p, xs[bracket], xs[bracket + 1]);
  const double f2 = p.f(x0, 2);
  if (std::abs(f2) <= 1e-12 * Th / (Om * Om))
    throw DegenerateStationaryPoint("expand_stationary: f'' vanishes at the stationary point");

  out.x0 = x0;
  const double kappa = std::min(p.b - x0, x0 - p.a);
  out.regime = kappa * std::sqrt(Th) / Om < 2.0 ? Regime::NearEdge : Regime::Interior;
  const cplx pref = e(p.f(x0, 0) + 0.125) / std::sqrt(cplx(f2));
  const double g0 = p.g(x0, 0);
  out.main_term = pref * g0;
  if (order == 1) {
    out.predicted_error = std::pow(Om, 4) / (Th * Th * std::pow(kappa, 3)) + Om / std::pow(Th, 1.5) +
                          std::pow(Om, 3) / (std::pow(Th, 1.5) * Og * Og);
    return out;
  }
  const double g1 = p.g(x0, 1), g2 = p.g(x0, 2);
  const double f3 = p.f(x0, 3), f4 = p.f(x0, 4);
  const cplx corr = kI * (g2 / (4 * kPi * f2) - g0 * f4 / (16 * kPi * f2 * f2) - g1 * f3 / (4 * kPi * f2 * f2) +
                          5 * g0 * f3 * f3 / (48 * kPi * f2 * f2 * f2));
  out.second_term = pref * corr;
  const double r = Om / Og;
  double s3 = 0.0, s5 = 0.0;
  for (int j = 0; j <= 5; ++j) {
    if (j <= 3) s3 += std::pow(r, j);
    s5 += std::pow(r, j);
  }
  out.predicted_error = std::pow(Om, 5) / (std::pow(Og, 4) * std::pow(Th, 2.5)) + Om / std::pow(Th, 2.5) * s3 +
                        std::pow(Om, 7) / (std::pow(Th, 3.5) * std::pow(Og, 6)) + Om / std::pow(Th, 3.5) * s5;
  return out;
}

DaggerValue u_dagger_direct(const SmoothWindow& W, double r, cplx s, double tol) {
  const Interval I = W.support();
  if (!(I.lo > 0.0)) throw PreconditionError("u_dagger_direct: window must be supported in (0, inf)");
  DaggerValue d;
  d.r = r;
  d.s = s;
  d.method = DaggerMethod::Direct;
  if (W.is_zero()) return d;
  const double sigma = s.real(), beta = s.imag();
  const auto res = require_within_budget(
      integrate_1d([&](double x) { return W(x) * std::pow(x, sigma - 1.0); },
                   [&](double x) { return beta * std::log(x) / kTwoPi - r * x; }, I.lo, I.hi, tol));
  d.value = res.value;
  d.abs_error_estimate = res.abs_error_estimate;
  const double x0 = (r != 0.0) ? beta / (kTwoPi * r) : -1.0;
  d.regime = (x0 >= I.lo / 2 && x0 <= 2 * I.hi) ? Regime::Interior : Regime::NoStationaryPoint;
  return d;
}

double u0(const SmoothWindow& W, double sigma, double x) { return std::pow(x, sigma) * W(x); }

double u1(const SmoothWindow& W, double sigma, double x, U1Form form) {
  // h = U_0 / x = x^{sigma-1} W
  const double a = sigma - 1.0;
  const double w0 = W.derivative(x, 0), w1 = W.derivative(x, 1), w2 = W.derivative(x, 2);
  const double xa = std::pow(x, a);
  const double h1 = a * xa / x * w0 + xa * w1;
  const double h2 = a * (a - 1.0) * xa / (x * x) * w0 + 2.0 * a * xa / x * w1 + xa * w2;
  const double c1 = form == U1Form::Corrected ? 1.0 : 0.25;
  return u0(W, sigma, x) / 12.0 + c1 * x * x * h1 + 0.5 * x * x * x * h2;
}

cplx u_sharp(const SmoothWindow& W, double sigma, double beta, double x, U1Form form) {
  return u0(W, sigma, x) - kI / beta * u1(W, sigma, x, form);
}

// Measured by calibrate_fourier_mellin(make_window_v(), 1.0); see tests/fixtures/calibration.conf.
FourierMellinCalibration default_fm_calibration() { return {9.778905e+04, 1.397297e+02}; }

DaggerValue u_dagger_asymptotic(const SmoothWindow& W, double r, cplx s, U1Form form,
                                const FourierMellinCalibration& cal) {
  const double sigma = s.real(), beta = s.imag();
  if (!(std::abs(beta) >= 20.0)) throw PreconditionError("u_dagger_asymptotic: requires |Im s| >= 20");
  DaggerValue d;
  d.r = r;
  d.s = s;
  d.method = DaggerMethod::Asymptotic;
  const Interval I = W.support();
  const double x0 = r != 0.0 ? beta / (kTwoPi * r) : -1.0;
  if (!(x0 >= I.lo / 2 && x0 <= 2 * I.hi)) {
    d.regime = Regime::NoStationaryPoint;
    const double a = (1.0 + std::abs(beta)) / std::abs(r), b = (1.0 + std::abs(r)) / std::abs(beta);
    d.abs_error_estimate = cal.no_stationary * std::pow(std::min(a, b), 3);
    return d;
  }
  d.regime = Regime::Interior;
  // sqrt(2 pi) e(1/8) / sqrt(-beta) (x0/e)^{i beta} U#(sigma, x0)
  const cplx phase = std::polar(1.0, beta * (std::log(x0) - 1.0));
  d.value = std::sqrt(kTwoPi) * e(0.125) / std::sqrt(cplx(-beta)) * phase * u_sharp(W, sigma, beta, x0, form);
  d.abs_error_estimate = cal.stationary * std::min(std::pow(std::abs(beta), -2.5), std::pow(std::abs(r), -2.5));
  return d;
}

FourierMellinCalibration calibrate_fourier_mellin(const SmoothWindow& W, double sigma) {
  FourierMellinCalibration c;
  const Interval I = W.support();
  auto at = [&](double t) { return I.lo + (t - 1.0) * I.width(); };
  for (double t : {1.2, 1.35, 1.5, 1.65, 1.8}) {
    for (double beta : {50.0, 100.0, 200.0, 400.0, 800.0}) {
      const double r = beta / (kTwoPi * at(t));
      const cplx s(sigma, beta);
      const cplx d = u_dagger_direct(W, r, s).value;
      const cplx a = u_dagger_asymptotic(W, r, s, U1Form::Corrected, {1.0, 1.0}).value;
      c.stationary = std::max(c.stationary, std::abs(d - a) * std::pow(beta, 2.5));
    }
  }
  for (double beta : {200.0, 1000.0}) {
    for (double t : {-1.0, 0.2, 8.0, 30.0}) {
      const double r = beta / (kTwoPi * t * I.lo);
      const double a = (1.0 + beta) / std::abs(r), b = (1.0 + std::abs(r)) / beta;
      const double bound = std::pow(std::min(a, b), 3);
      c.no_stationary = std::max(c.no_stationary, std::abs(u_dagger_direct(W, r, cplx(sigma, beta)).value) / bound);
    }
  }
  return c;
}

DaggerGrid::DaggerGrid(const SmoothWindow& W, int nodes) {
  if (nodes < 2) throw PreconditionError("DaggerGrid: need at least two nodes");
  const Interval I = W.support();
  const double h = I.width() / nodes;
  for (int i = 1; i < nodes; ++i) {
    const double x = I.lo + i * h;
    const double w = W(x);
    if (w == 0.0) continue;
    x_.push_back(x);
    w_.push_back(h * w);
  }
}

cplx DaggerGrid::operator()(double r, cplx s) const {
  cplx acc = 0.0;
  for (std::size_t i = 0; i < x_.size(); ++i) {
    const double x = x_[i];
    const double lx = std::log(x);
    acc += w_[i] * std::exp((s.real() - 1.0) * lx) * e(s.imag() * lx / kTwoPi - r * x);
  }
  return acc;
}

int DaggerGrid::nodes_for(const SmoothWindow& W, double r_max, double beta_max) {
  const Interval I = W.support();
  const double cycles = std::abs(r_max) + std::abs(beta_max) / (kTwoPi * I.lo);
  // The spectra of V and U fall below 1e-15 relative about 300 and 600 cycles past the phase rate.
  return static_cast<int>(std::ceil(I.width() * (cycles + 700.0))) + 1;
}

}  // namespace weyl
