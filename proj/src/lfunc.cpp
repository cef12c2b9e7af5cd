#include "weyl/lfunc.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>

#include "weyl/error.hpp"
#include "weyl/fit.hpp"
#include "weyl/specialfn.hpp"

namespace weyl {

namespace {

// Distance from Re(s + u) = Re s to the first gamma pole on the left, measured in Re u.
double pole_room(const GammaFactorKind& kind, double sigma) {
  if (const auto* h = std::get_if<Holomorphic>(&kind)) return sigma + 0.5 * (h->k - 1);
  const auto& m = std::get<Maass>(kind);
  return sigma + m.delta - std::abs(m.ell.imag());
}

double transition_scale(const GammaFactorKind& kind, cplx s) {
  if (const auto* h = std::get_if<Holomorphic>(&kind)) return std::abs(s + 0.5 * (h->k - 1)) / kTwoPi;
  return (std::abs(s) + std::abs(std::get<Maass>(kind).ell) + 1.0) / kTwoPi;
}

cplx dual(const GammaFactorKind& kind, cplx s) { return log_gamma_inf(kind, s); }

}  // namespace

AfeWeight gaussian_weight(double scale) {
  if (!(scale > 0.0)) throw PreconditionError("gaussian_weight: scale must be positive");
  return {"exp((u/" + std::to_string(scale) + ")^2)", [scale](cplx u) { return std::exp(u * u / (scale * scale)); }};
}

AfeWeight cosine_gaussian_weight(double scale) {
  if (!(scale > 0.0)) throw PreconditionError("cosine_gaussian_weight: scale must be positive");
  return {"cos(u/" + std::to_string(scale) + ") exp((u/" + std::to_string(scale) + ")^2)",
          [scale](cplx u) { return std::cos(u / scale) * std::exp(u * u / (scale * scale)); }};
}

cplx log_gamma_inf(const GammaFactorKind& kind, cplx s) {
  validate_kind(kind);
  if (const auto* h = std::get_if<Holomorphic>(&kind)) return -s * std::log(kTwoPi) + log_gamma(s + 0.5 * (h->k - 1));
  const auto& m = std::get<Maass>(kind);
  const cplx il = kI * m.ell;
  return -s * std::log(kPi) + log_gamma(0.5 * (s + static_cast<double>(m.delta) + il)) +
         log_gamma(0.5 * (s + static_cast<double>(m.delta) - il));
}

CutoffWeight::CutoffWeight(const GammaFactorKind& kind, cplx s, const AfeConfig& cfg, double y_max)
    : kind_(kind), s_(s), weight_(cfg.weight), damping_(cfg.damping) {
  validate_kind(kind);
  if (!weight_.G) throw PreconditionError("CutoffWeight: weight function missing");
  if (!(cfg.abscissa > 0.0) || !(cfg.damping > 0.0)) throw PreconditionError("CutoffWeight: bad contour settings");
  const double room = pole_room(kind, s.real());
  if (!(room > 0.0)) throw PreconditionError("CutoffWeight: Re s too far left of the gamma poles");
  log_gamma_s_ = log_gamma_inf(kind, s);
  y_switch_ = transition_scale(kind, s);
  const double c_left = std::min(cfg.abscissa, 0.5 * room);
  // Nyquist for y^{-iv} against the gamma phase, and exp(-40) aliasing from the nearest singularity.
  const double rate = std::log(2.0 + std::max(y_max, 1.0 / y_switch_)) + std::log(2.0 + std::abs(s.imag())) + 12.0;
  const double h = std::min(kPi / rate, kTwoPi * std::min(cfg.abscissa, c_left) / 40.0);
  right_ = build(cfg.abscissa, h);
  left_ = build(-c_left, h);
}

CutoffWeight::Line CutoffWeight::build(double c, double h) const {
  auto node = [&](double v) {
    const cplx u(c, v);
    return h / kTwoPi * weight_.G(u) * std::exp(log_gamma_inf(kind_, s_ + u) - log_gamma_s_) / u;
  };
  // Walk outward until the integrand has stayed below damping for 8 units of v.
  auto reach = [&](double dir) {
    double quiet = 0.0, v = 0.0;
    while (quiet < 8.0) {
      v += dir * h;
      if (std::abs(v) > 2000.0) throw RangeError("CutoffWeight: contour weight does not decay");
      quiet = std::abs(node(v)) < damping_ ? quiet + h : 0.0;
    }
    return std::abs(v);
  };
  const long jl = static_cast<long>(std::ceil(reach(-1.0) / h)), jr = static_cast<long>(std::ceil(reach(1.0) / h));
  Line l;
  l.c = c;
  l.h = h;
  l.v0 = -static_cast<double>(jl) * h;
  l.w.resize(static_cast<std::size_t>(jl + jr + 1));
  for (long j = -jl; j <= jr; ++j) l.w[static_cast<std::size_t>(j + jl)] = node(static_cast<double>(j) * h);
  return l;
}

cplx CutoffWeight::line(const Line& l, double y) {
  if (!(y > 0.0)) throw PreconditionError("CutoffWeight: y must be positive");
  const double ly = std::log(y);
  constexpr std::size_t kBlock = 256;
  const cplx step = std::polar(1.0, -l.h * ly);
  cplx acc = 0.0, ph;
  for (std::size_t j = 0; j < l.w.size(); ++j) {
    if (j % kBlock == 0) ph = std::polar(1.0, -(l.v0 + static_cast<double>(j) * l.h) * ly);
    acc += l.w[j] * ph;
    ph *= step;
  }
  return std::exp(-l.c * ly) * acc;
}

AfeValue afe_evaluate(const CuspForm& form, double t, const AfeConfig& cfg) {
  if (!form.epsilon_f) throw MissingRootNumber("afe_value: the form has no root number");
  const double sqrt_m = std::sqrt(static_cast<double>(form.level));
  const cplx s(0.5, t);
  const double y_max = std::max(1.0, static_cast<double>(form.n_max()) / sqrt_m);
  const CutoffWeight Vs(form.kind, s, cfg, y_max), Vd(form.kind, 1.0 - s, cfg, y_max);
  const long n_min = static_cast<long>(std::ceil(3.0 * (1.0 + std::abs(t)) * sqrt_m));

  long n_afe = cfg.n_afe;
  if (n_afe > 0) {
    if (n_afe < n_min)
      throw PreconditionError("afe_value: n_afe " + std::to_string(n_afe) + " is below 3 (1 + |t|) sqrt(M) = " +
                              std::to_string(n_min));
  } else {
    double y = static_cast<double>(n_min) / sqrt_m, first_quiet = 0.0;
    for (int quiet = 0; quiet < 3; y *= 1.25) {
      if (y > 1e8) throw RangeError("afe_value: cutoff weights never fall below tail_tol");
      if (std::max(std::abs(Vs(y)), std::abs(Vd(y))) <= cfg.tail_tol) {
        if (quiet++ == 0) first_quiet = y;
      } else {
        quiet = 0;
      }
    }
    n_afe = std::max(n_min, static_cast<long>(std::ceil(first_quiet * sqrt_m)));
  }
  if (n_afe > form.n_max())
    throw RangeError("afe_value: coefficients stop at n = " + std::to_string(form.n_max()) + ", the sums need n = " +
                     std::to_string(n_afe));

  AfeValue out;
  cplx second = 0.0;
  for (long n = 1; n <= n_afe; ++n) {
    const double ln = std::log(static_cast<double>(n)), y = static_cast<double>(n) / sqrt_m;
    const cplx a = form.lam(n) / std::sqrt(static_cast<double>(n));
    out.first_sum += a * std::polar(1.0, -t * ln) * Vs(y);
    second += std::conj(a) * std::polar(1.0, t * ln) * Vd(y);
  }
  const cplx ratio = *form.epsilon_f * std::exp((0.5 - s) * std::log(static_cast<double>(form.level)) +
                                                dual(form.kind, 1.0 - s) - dual(form.kind, s));
  out.second_sum = ratio * second;
  out.value = out.first_sum + out.second_sum;
  out.n_used = n_afe;

  const long hi = std::min(2 * n_afe, form.n_max());
  if (hi > n_afe) {
    for (long n = n_afe + 1; n <= hi; ++n) {
      const double y = static_cast<double>(n) / sqrt_m;
      out.tail_estimate += std::abs(form.lam(n)) / std::sqrt(static_cast<double>(n)) * (std::abs(Vs(y)) + std::abs(Vd(y)));
    }
  } else {
    const double y = static_cast<double>(n_afe) / sqrt_m;
    out.tail_estimate = 2.0 * std::sqrt(static_cast<double>(n_afe)) * (std::abs(Vs(y)) + std::abs(Vd(y)));
  }
  return out;
}

cplx afe_value(const CuspForm& form, double t, const AfeConfig& cfg) { return afe_evaluate(form, t, cfg).value; }

TailReport tail_check(const CuspForm& form, double t, const AfeConfig& cfg) {
  const CutoffWeight V(form.kind, cplx(0.5, t), cfg);
  TailReport r;
  r.t = t;
  for (double lam : {1.0, 2.0, 4.0, 8.0}) {
    r.lambda.push_back(lam);
    r.y.push_back(lam * (1.0 + std::abs(t)));
    r.v_abs.push_back(std::abs(V(r.y.back())));
  }
  r.slope = fit_loglog(r.lambda, r.v_abs).slope;
  r.superpolynomial = r.slope <= -3.0;
  const double top = 64.0 * (1.0 + std::abs(t));
  for (int j = -64; std::exp2(j / 16.0) <= top; ++j) {
    const double y = std::exp2(j / 16.0);
    if (std::abs(V(y)) >= 0.5) r.crossover = y;
  }
  return r;
}

GrowthFit fit_growth(std::span<const double> t, std::span<const double> L_abs, int windows) {
  if (t.size() != L_abs.size()) throw PreconditionError("fit_growth: length mismatch");
  if (windows < 3 || t.size() < static_cast<std::size_t>(windows))
    throw PreconditionError("fit_growth: need at least 3 windows and one sample per window");
  GrowthFit g;
  const std::size_t n = t.size(), w = static_cast<std::size_t>(windows);
  for (std::size_t i = 0; i < w; ++i) {
    const std::size_t a = i * n / w, b = (i + 1) * n / w;
    const auto top = std::max_element(L_abs.begin() + static_cast<std::ptrdiff_t>(a),
                                      L_abs.begin() + static_cast<std::ptrdiff_t>(b));
    g.window_t.push_back(t[static_cast<std::size_t>(top - L_abs.begin())]);
    g.window_max.push_back(*top);
  }
  const LineFit f = fit_loglog(g.window_t, g.window_max);
  g.exponent = f.slope;
  g.exponent_stderr = f.slope_stderr;
  g.band_lo = f.slope - 2.0 * f.slope_stderr;
  g.band_hi = f.slope + 2.0 * f.slope_stderr;
  return g;
}

const char* const kGrowthDisclaimer =
    "Empirical fit over a finite t range. The Weyl exponent 1/3 is an asymptotic bound and is not certified by this scan.";

GrowthReport growth_scan(const CuspForm& form, std::span<const double> t_grid, const AfeConfig& cfg, int windows,
                         Exec exec) {
  for (double t : t_grid)
    if (!(t >= 10.0 && t <= 1000.0)) throw PreconditionError("growth_scan: t must lie in [10, 1000]");
  GrowthReport rep;
  rep.records.resize(t_grid.size());
  std::exception_ptr err;
  const long n = static_cast<long>(t_grid.size());
  auto one = [&](long i) {
    const AfeValue v = afe_evaluate(form, t_grid[i], cfg);
    ScanRecord& r = rep.records[static_cast<std::size_t>(i)];
    r.t = t_grid[i];
    r.L_abs = std::abs(v.value);
    r.first_sum = v.first_sum;
    r.second_sum = v.second_sum;
    r.n_used = v.n_used;
    r.tail_estimate = v.tail_estimate;
    r.flagged = !(v.tail_estimate < 1e-3 * r.L_abs);
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
      try {
        one(i);
      } catch (...) {
#pragma omp critical
        if (!err) err = std::current_exception();
      }
    }
    if (err) std::rethrow_exception(err);
  } else {
    for (long i = 0; i < n; ++i) one(i);
  }
  std::vector<double> ts, ls;
  for (const ScanRecord& r : rep.records) {
    ts.push_back(r.t);
    ls.push_back(r.L_abs);
  }
  rep.fit = fit_growth(ts, ls, windows);
  rep.disclaimer = kGrowthDisclaimer;
  return rep;
}

}  // namespace weyl
