#include "weyl/voronoi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "weyl/arith.hpp"
#include "weyl/error.hpp"

namespace weyl {

namespace {

constexpr int kBlock = 512;  // phasors are re-seeded exactly at every block start

// The contour trapezoid rule aliases e^{2 pi m sigma / dtau} W-hat(y e^{4 pi m / dtau}) into W-hat(y), m != 0.
// m = 1 is killed by the decay of W-hat once 4 pi / dtau >= 25. For m = -1, W-hat(y) ~ y^{(k-1)/2} as y -> 0 in the
// holomorphic case, while for Maass forms it stays O(1), so there the step has to shrink with sigma.
double default_dtau(const GammaFactorKind& kind, double sigma) {
  if (const auto* h = std::get_if<Holomorphic>(&kind)) return std::min(0.5, kTwoPi * (sigma + h->k - 1) / 37.0);
  return std::min(0.5, kTwoPi * sigma / 37.0);
}

}  // namespace

VoronoiTransform::VoronoiTransform(const GammaFactorKind& kind, int epsilon_g, const SmoothWindow& W,
                                   ContourOptions opt, Exec exec) {
  validate_kind(kind);
  holomorphic_ = std::holds_alternative<Holomorphic>(kind);
  if (!holomorphic_ && epsilon_g != 1 && epsilon_g != -1) throw PreconditionError("VoronoiTransform: eps_g must be +-1");
  sigma_ = opt.sigma > 0.0 ? opt.sigma : (holomorphic_ ? 0.5 : 0.1);
  if (holomorphic_ && !(sigma_ > 0.0 && sigma_ < 1.0))
    throw PreconditionError("VoronoiTransform: holomorphic contour needs 0 < sigma < 1");
  if (!(sigma_ > 0.0)) throw PreconditionError("VoronoiTransform: sigma must be positive");
  dtau_ = opt.dtau > 0.0 ? opt.dtau : default_dtau(kind, sigma_);
  zero_ = W.is_zero();
  if (zero_) return;
  const Interval I = W.support();
  if (!(I.lo > 0.0)) throw PreconditionError("VoronoiTransform: window must be supported in (0, inf)");
  if (opt.mellin_nodes < 16) throw PreconditionError("VoronoiTransform: too few Mellin nodes");

  // W~(sigma + i tau) = int W(e^u) e^{u (1 - sigma/2)} e^{-i tau u / 2} du, trapezoid in u.
  const int M = opt.mellin_nodes;
  const double u0 = std::log(I.lo), hu = (std::log(I.hi) - u0) / M;
  std::vector<double> uu, ww;
  for (int j = 1; j < M; ++j) {
    const double u = u0 + j * hu;
    const double w = W(std::exp(u));
    if (w == 0.0) continue;
    uu.push_back(u);
    ww.push_back(hu * w * std::exp(u * (1.0 - 0.5 * sigma_)));
  }
  auto mellin_at = [&](double tau) {
    cplx acc = 0.0;
    for (std::size_t j = 0; j < uu.size(); ++j) acc += ww[j] * std::polar(1.0, -0.5 * tau * uu[j]);
    return acc;
  };
  const GammaFactorKind c0 = holomorphic_ ? kind : GammaFactorKind(Maass{std::get<Maass>(kind).ell, 0});
  const GammaFactorKind c1 = holomorphic_ ? kind : GammaFactorKind(Maass{std::get<Maass>(kind).ell, 1});
  auto factors = [&](double tau, cplx& gp, cplx& gm) {
    const cplx s(sigma_, tau);
    if (holomorphic_) {
      gp = gamma_factor(kind, s);
      gm = 0.0;
    } else {
      const cplx a = gamma_factor(c0, s), b = gamma_factor(c1, s);
      gp = a - b;
      gm = a + b;
    }
  };

  // Truncation: coarse scan of |W~ Gamma| for the point past which it stays below tail_tol * peak.
  if (opt.tau_cut > 0.0) {
    tau_cut_ = opt.tau_cut;
  } else {
    constexpr double step = 25.0, window = 1000.0;
    std::vector<double> g;
    for (double t = 0.0; t <= opt.tau_limit + window; t += step) {
      cplx gp, gm;
      factors(t, gp, gm);
      g.push_back(std::abs(mellin_at(t)) * std::max(std::abs(gp), std::abs(gm)));
    }
    const double peak = *std::max_element(g.begin(), g.end());
    const auto span = static_cast<std::size_t>(window / step);
    std::size_t last = 0;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (g[i] >= opt.tail_tol * peak) last = i;
    tau_cut_ = std::min(opt.tau_limit, (last + 1) * step);
    double total = 0.0, tail = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      total += g[i];
      if (i * step > tau_cut_) tail += g[i];
    }
    contour_tail_ = total > 0.0 ? tail / total : 0.0;
    if (last + span >= g.size())
      warning_ = "contour truncation reached tau_limit before the integrand decayed below tail_tol";
  }

  const long K = static_cast<long>(std::ceil(tau_cut_ / dtau_));
  plus_.assign(static_cast<std::size_t>(K) + 1, 0.0);
  if (!holomorphic_) minus_.assign(plus_.size(), 0.0);
  const cplx pref_plus = holomorphic_ ? std::pow(kI, std::get<Holomorphic>(kind).k) / 2.0 : cplx(0.5);
  const cplx pref_minus = holomorphic_ ? cplx(0.0) : cplx(0.5 * epsilon_g);
  const long blocks = (K + kBlock) / kBlock;
  auto run_block = [&](long b) {
    const long k0 = b * kBlock, k1 = std::min(K + 1, k0 + kBlock);
    std::vector<cplx> ph(uu.size()), rot(uu.size());
    for (std::size_t j = 0; j < uu.size(); ++j) {
      ph[j] = std::polar(1.0, -0.5 * (k0 * dtau_) * uu[j]);
      rot[j] = std::polar(1.0, -0.5 * dtau_ * uu[j]);
    }
    for (long k = k0; k < k1; ++k) {
      cplx acc = 0.0;
      for (std::size_t j = 0; j < uu.size(); ++j) {
        acc += ww[j] * ph[j];
        ph[j] *= rot[j];
      }
      cplx gp, gm;
      factors(k * dtau_, gp, gm);
      const double twice = k == 0 ? 1.0 : 2.0;
      plus_[static_cast<std::size_t>(k)] = twice * acc * gp;
      if (!holomorphic_) minus_[static_cast<std::size_t>(k)] = twice * acc * gm;
    }
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (long b = 0; b < blocks; ++b) run_block(b);
  } else {
    for (long b = 0; b < blocks; ++b) run_block(b);
  }
  // Fold the prefactor, the i from ds = i dtau, and dtau into the real-part evaluation below.
  pref_plus_ = pref_plus * dtau_;
  pref_minus_ = pref_minus * dtau_;
}

cplx VoronoiTransform::operator()(double y, int sign) const {
  if (!(y > 0.0)) throw PreconditionError("W-hat: requires y > 0");
  if (sign != 1 && sign != -1) throw PreconditionError("W-hat: sign must be +-1");
  if (zero_ || (holomorphic_ && sign == -1)) return 0.0;
  const std::vector<cplx>& c = sign == 1 ? plus_ : minus_;
  const double ly = std::log(y);
  const cplx w = std::polar(1.0, -0.5 * dtau_ * ly);
  cplx acc = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) acc = acc * w + c[k];
  return (sign == 1 ? pref_plus_ : pref_minus_) * (std::exp(-0.5 * sigma_ * ly) * acc.real());
}

void VoronoiTransform::evaluate(std::span<const double> ys, int sign, std::span<cplx> out, Exec exec) const {
  if (out.size() != ys.size()) throw PreconditionError("W-hat: output size mismatch");
  const long n = static_cast<long>(ys.size());
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 64)
    for (long i = 0; i < n; ++i) out[i] = (*this)(ys[i], sign);
  } else {
    for (long i = 0; i < n; ++i) out[i] = (*this)(ys[i], sign);
  }
}

VoronoiTransform::Decay VoronoiTransform::decay(double tol, double y_limit) const {
  Decay d;
  if (zero_) return d;
  std::vector<double> ys, v;
  for (int j = 0;; ++j) {
    const double y = std::exp2(j / 8.0);
    if (y > y_limit) break;
    ys.push_back(y);
  }
  v.resize(ys.size());
  const long n = static_cast<long>(ys.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < n; ++i) {
    double m = std::abs((*this)(ys[i], 1));
    if (!holomorphic_) m = std::max(m, std::abs((*this)(ys[i], -1)));
    v[i] = m;
  }
  std::size_t last = 0;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] >= tol) last = i;
  const std::size_t cut = std::min(v.size() - 1, last + 2);
  d.y_max = ys[cut];
  for (std::size_t i = cut; i + 1 < v.size(); ++i) {
    double env = 0.0;
    for (std::size_t j = i; j < std::min(v.size(), i + 8); ++j) env = std::max(env, v[j]);
    d.tail_integral += env * (ys[i + 1] - ys[i]);
  }
  return d;
}

cplx what_transform(const GammaFactorKind& kind, const SmoothWindow& W, double y, int sign, int epsilon_g) {
  if (std::holds_alternative<Holomorphic>(kind) && sign == -1) return 0.0;
  return VoronoiTransform(kind, epsilon_g, W)(y, sign);
}

namespace {

void check_instance(const VoronoiInstance& inst) {
  if (inst.form == nullptr) throw PreconditionError("voronoi: no form");
  if (inst.c < 1) throw PreconditionError("voronoi: c must be positive");
  if (!(inst.N > 0.0)) throw PreconditionError("voronoi: N must be positive");
  if (std::gcd(inst.a, inst.c) != 1) throw PreconditionError("voronoi: gcd(a, c) > 1");
  if (std::gcd(static_cast<long>(inst.form->level), inst.c) != 1) throw PreconditionError("voronoi: gcd(c, M) > 1");
}

}  // namespace

long voronoi_rhs_terms(const VoronoiInstance& inst, const VoronoiTransform& T) {
  check_instance(inst);
  if (inst.n_cut_rhs > 0) return inst.n_cut_rhs;
  const double M = inst.form->level;
  const double y_max = T.decay(inst.rhs_tol).y_max;
  return static_cast<long>(std::ceil(y_max * M * inst.c * inst.c / inst.N));
}

VoronoiResult voronoi_check(const VoronoiInstance& inst, const VoronoiTransform& T, Exec exec) {
  check_instance(inst);
  const CuspForm& f = *inst.form;
  VoronoiResult r;
  r.contour_tail = T.contour_tail();
  if (inst.W.is_zero()) return r;

  const Interval I = inst.W.support();
  const long n0 = std::max(1L, static_cast<long>(std::ceil(inst.N * I.lo)));
  const long n1 = static_cast<long>(std::floor(inst.N * I.hi));
  if (n1 > f.n_max()) throw PreconditionError("voronoi: form has too few coefficients for the left side");
  for (long n = n0; n <= n1; ++n) r.lhs += f.lam(n) * e_frac(inst.a * n, inst.c) * inst.W(n / inst.N);
  r.n_lhs = std::max(0L, n1 - n0 + 1);

  const long M = f.level, c = inst.c;
  long n_cut = inst.n_cut_rhs;
  double tail_integral = 0.0;
  if (n_cut <= 0) {
    const auto d = T.decay(inst.rhs_tol);
    n_cut = static_cast<long>(std::ceil(d.y_max * M * c * c / inst.N));
    tail_integral = d.tail_integral;
  }
  if (n_cut > f.n_max())
    throw PreconditionError("voronoi: dual sum needs " + std::to_string(n_cut) + " coefficients, form has " +
                            std::to_string(f.n_max()));
  r.n_rhs = n_cut;
  const long abar = inverse_mod(mod(static_cast<long long>(inst.a) * M, c), c);
  std::vector<double> ys(static_cast<std::size_t>(n_cut));
  for (long n = 1; n <= n_cut; ++n) ys[n - 1] = n * inst.N / (static_cast<double>(M) * c * c);
  std::vector<cplx> wp(ys.size()), wm;
  T.evaluate(ys, 1, wp, exec);
  const bool maass = f.is_maass();
  if (maass) {
    wm.resize(ys.size());
    T.evaluate(ys, -1, wm, exec);
  }
  cplx sp = 0.0, sm = 0.0;
  for (long n = 1; n <= n_cut; ++n) {
    sp += f.lam(n) * e_frac(-abar * n, c) * wp[n - 1];
    if (maass) sm += f.lam(n) * e_frac(abar * n, c) * wm[n - 1];
  }
  const cplx eta = inst.strip_eta ? cplx(1.0) : f.eta_M;
  const double scale = inst.N / (c * std::sqrt(static_cast<double>(M)));
  r.rhs = eta * scale * (f.chi_at(-c) * sp + (maass ? f.chi_at(c) * sm : cplx(0.0)));
  r.rhs_tail_estimate = c * std::sqrt(static_cast<double>(M)) * tail_integral * (maass ? 2.0 : 1.0);
  r.residual = std::abs(r.lhs - r.rhs) / (1.0 + std::abs(r.lhs) + std::abs(r.rhs));
  return r;
}

VoronoiResult voronoi_check(const VoronoiInstance& inst, Exec exec) {
  check_instance(inst);
  const VoronoiTransform T(inst.form->kind, inst.form->epsilon_g, inst.W, inst.contour, exec);
  return voronoi_check(inst, T, exec);
}

EtaCalibration calibrate_eta(std::span<const VoronoiInstance> probes, Exec exec) {
  if (probes.size() < 2) throw PreconditionError("calibrate_eta: needs at least two probes");
  std::vector<cplx> lhs, rhs0;
  for (VoronoiInstance p : probes) {
    p.strip_eta = true;
    const VoronoiResult r = voronoi_check(p, exec);
    if (std::abs(r.rhs) < 1e-12) throw PreconditionError("calibrate_eta: degenerate probe");
    lhs.push_back(r.lhs);
    rhs0.push_back(r.rhs);
  }
  cplx num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    num += std::conj(rhs0[i]) * lhs[i];
    den += std::norm(rhs0[i]);
  }
  EtaCalibration out;
  const cplx raw = num / den;
  out.raw_modulus = std::abs(raw);
  out.eta = raw / out.raw_modulus;
  for (std::size_t i = 0; i < lhs.size(); ++i) out.spread = std::max(out.spread, std::abs(lhs[i] / rhs0[i] - out.eta));
  if (out.spread > 1e-3)
    throw ConsistencyError("calibrate_eta: probes disagree by " + std::to_string(out.spread));
  return out;
}

}  // namespace weyl
