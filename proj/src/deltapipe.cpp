#include "weyl/deltapipe.hpp"

#include <algorithm>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include "weyl/arith.hpp"
#include "weyl/error.hpp"
#include "weyl/oscillate.hpp"

namespace weyl {

namespace {

constexpr int kBlock = 512;
constexpr long kChunk = 256;

// Fixed chunking, so that the serial and the parallel path add in the same order.
template <class F>
cplx chunked_sum(long count, F&& term, Exec exec) {
  const long chunks = (count + kChunk - 1) / kChunk;
  std::vector<cplx> part(static_cast<std::size_t>(std::max(0L, chunks)));
  auto run = [&](long ch) {
    cplx acc = 0.0;
    for (long i = ch * kChunk; i < std::min(count, (ch + 1) * kChunk); ++i) acc += term(i);
    part[static_cast<std::size_t>(ch)] = acc;
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (long ch = 0; ch < chunks; ++ch) run(ch);
  } else {
    for (long ch = 0; ch < chunks; ++ch) run(ch);
  }
  cplx s = 0.0;
  for (const cplx& p : part) s += p;
  return s;
}

void check_delta_args(long q, double X, double eps) {
  if (q < 1) throw PreconditionError("trivial_delta: q must be positive");
  if (!(X > 1.0)) throw PreconditionError("trivial_delta: requires X > 1");
  if (!(static_cast<double>(q) > std::pow(X, 1.0 + eps)))
    throw PreconditionError("trivial_delta: requires q > X^{1+eps}");
}

double inv_sum(const PipelineConfig& cfg) {
  double s = 0.0;
  for (long p : cfg.primes) s += 1.0 / static_cast<double>(p);
  return s;
}

// Integer range of n with W(n / N) possibly nonzero.
std::pair<long, long> support_range(const SmoothWindow& W, double N) {
  const Interval I = W.support();
  return {std::max(1L, static_cast<long>(std::floor(N * I.lo)) + 1), static_cast<long>(std::ceil(N * I.hi)) - 1};
}

// Cycles past the phase rate at which the spectrum of a bump of width w has fallen to tol.
double spectral_reach(double w, double tol) {
  const double l = std::log(1.0 / tol);
  return l * l / (kTwoPi * w);
}

double dtau_for(const GammaFactorKind& g, const PipelineConfig& cfg) {
  if (std::holds_alternative<Maass>(g)) return cfg.dtau > 0.0 ? std::min(cfg.dtau, kTwoPi / 37.0) : kTwoPi / 37.0;
  return cfg.dtau > 0.0 ? cfg.dtau : 0.5;
}

// V^dagger(Kx, 1 - s/2) has phase rate K x + tau / (4 pi u) in u; past the last stationary tau the mismatch
// is at least |tau| / (4 pi b) - K b on supp V = [a, b]. The measured decay of I* in tau is slower than the
// bare bump spectrum by a factor 1.6 in reach.
double default_tau_cut(const PipelineConfig& cfg) {
  const double b = make_window_v().support().hi;
  return 4.0 * kPi * b * (1.6 * spectral_reach(1.0, cfg.trunc_tol) + cfg.K * b);
}

// Nested trapezoid quadrature for I_delta: x over supp V, u over supp V for V^dagger, v over supp U for U^dagger,
// tau on the line Re s = 1. The sums are reordered so that a U^dagger column at the x nodes is folded once
// into tau samples; I(n) is then a single sum over tau.
class IKernel {
 public:
  IKernel(const PipelineConfig& cfg, int level, double tau_cut, long r_max, const GammaFactorKind& g, Exec exec)
      : cfg_(cfg), level_(level), U_(make_window_u()), V_(make_window_v()) {
    dtau_ = dtau_for(g, cfg);
    const long J = static_cast<long>(std::ceil(tau_cut / dtau_));
    tau0_ = -J * dtau_;
    const double K = cfg.K;
    const double rho_max = cfg.N * static_cast<double>(r_max) / static_cast<double>(cfg.c) + 2.0 * K;
    const DaggerGrid gx(V_, DaggerGrid::nodes_for(V_, 4.5 * K, 0.0));
    const DaggerGrid gu(V_, DaggerGrid::nodes_for(V_, 2.0 * K, J * dtau_ / 2.0));
    // Uniform v nodes, zero weights kept, so that e(-rho v) runs as a recurrence.
    const Interval Iv = U_.support();
    const int nv = DaggerGrid::nodes_for(U_, rho_max, cfg.t);
    hv_ = Iv.width() / nv;
    v0_ = Iv.lo + hv_;
    for (int l = 1; l < nv; ++l) {
      const double v = Iv.lo + l * hv_;
      wv_.push_back(hv_ * U_(v) * std::polar(1.0, -cfg.t * std::log(v)));
    }
    x_ = gx.x();
    wx_ = gx.weight();
    u_ = gu.x();
    wu_ = gu.weight();
    const std::size_t nx = x_.size(), nu = u_.size();
    E_.assign(nu * nx, 0.0);
    for (std::size_t k = 0; k < nu; ++k)
      for (std::size_t i = 0; i < nx; ++i) E_[k * nx + i] = wx_[i] * e(-K * x_[i] * u_[k]);
    gam_.resize(static_cast<std::size_t>(2 * J + 1));
    const long m = static_cast<long>(gam_.size());
    auto fill = [&](long j) {
      gam_[static_cast<std::size_t>(j)] = gamma_factor(g, cplx(1.0, tau0_ + j * dtau_)) * (dtau_ / kTwoPi);
    };
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
      for (long j = 0; j < m; ++j) fill(j);
    } else {
      for (long j = 0; j < m; ++j) fill(j);
    }
  }

  double tau_cut() const { return -tau0_; }

  // U^dagger(N r / c - K x_i, 1 - it) at the x nodes.
  std::vector<cplx> u_column(long r) const {
    std::vector<cplx> a(x_.size());
    const double base = cfg_.N * static_cast<double>(r) / static_cast<double>(cfg_.c);
    const long m = static_cast<long>(wv_.size());
    for (std::size_t i = 0; i < x_.size(); ++i) {
      const double rho = base - cfg_.K * x_[i];
      const cplx rot = e(-rho * hv_);
      cplx acc = 0.0;
      for (long l0 = 0; l0 < m; l0 += kBlock) {
        cplx ph = e(-rho * (v0_ + l0 * hv_));
        for (long l = l0; l < std::min(m, l0 + kBlock); ++l) {
          acc += wv_[static_cast<std::size_t>(l)] * ph;
          ph *= rot;
        }
      }
      a[i] = acc;
    }
    return a;
  }

  // G_j = gamma(s_j) (dtau / 2 pi) int V(x) U^dagger-column(x) V^dagger(K x, 1 - s_j / 2) dx.
  std::vector<cplx> fold(const std::vector<cplx>& a, Exec exec) const {
    const std::size_t nx = x_.size(), nu = u_.size();
    std::vector<cplx> R(nu);
    for (std::size_t k = 0; k < nu; ++k) {
      cplx acc = 0.0;
      for (std::size_t i = 0; i < nx; ++i) acc += E_[k * nx + i] * a[i];
      R[k] = acc * wu_[k] / std::sqrt(u_[k]);
    }
    const long m = static_cast<long>(gam_.size());
    std::vector<cplx> G(gam_.size());
    const long blocks = (m + kBlock - 1) / kBlock;
    auto run = [&](long b) {
      const long j0 = b * kBlock, j1 = std::min(m, j0 + kBlock);
      std::vector<cplx> ph(nu), rot(nu);
      for (std::size_t k = 0; k < nu; ++k) {
        const double lu = std::log(u_[k]);
        ph[k] = std::polar(1.0, -0.5 * (tau0_ + j0 * dtau_) * lu);
        rot[k] = std::polar(1.0, -0.5 * dtau_ * lu);
      }
      for (long j = j0; j < j1; ++j) {
        cplx acc = 0.0;
        for (std::size_t k = 0; k < nu; ++k) {
          acc += R[k] * ph[k];
          ph[k] *= rot[k];
        }
        G[static_cast<std::size_t>(j)] = acc * gam_[static_cast<std::size_t>(j)];
      }
    };
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
      for (long b = 0; b < blocks; ++b) run(b);
    } else {
      for (long b = 0; b < blocks; ++b) run(b);
    }
    return G;
  }

  // sum_j Y^{-s_j} G_j with s_j = 1 + i tau_j.
  cplx at(double Y, const std::vector<cplx>& G) const {
    const double ly = std::log(Y);
    const long m = static_cast<long>(G.size());
    cplx acc = 0.0;
    for (long j0 = 0; j0 < m; j0 += kBlock) {
      cplx ph = std::polar(1.0, -(tau0_ + j0 * dtau_) * ly);
      const cplx rot = std::polar(1.0, -dtau_ * ly);
      for (long j = j0; j < std::min(m, j0 + kBlock); ++j) {
        acc += G[static_cast<std::size_t>(j)] * ph;
        ph *= rot;
      }
    }
    return acc / Y;
  }

  double Y(long n) const {
    return std::sqrt(static_cast<double>(n) * cfg_.N) / (static_cast<double>(cfg_.c) * std::sqrt(double(level_)));
  }

 private:
  PipelineConfig cfg_;
  int level_;
  SmoothWindow U_, V_;
  double dtau_ = 0.5, tau0_ = 0.0, v0_ = 0.0, hv_ = 0.0;
  std::vector<double> x_, wx_, u_, wu_;
  std::vector<cplx> wv_, E_, gam_;
};

// J_nu(z): the Hankel expansion for z >= z_min(), Boost below.
class BesselJ {
 public:
  explicit BesselJ(int nu) : nu_(nu) {
    const double mu = 4.0 * nu * nu;
    std::vector<double> a{1.0};
    for (int k = 1; k <= 60; ++k) a.push_back(a.back() * (mu - (2.0 * k - 1) * (2.0 * k - 1)) / (8.0 * k));
    // Smallest z (on a 5% ladder) where the series reaches 1e-17 while its terms still shrink.
    for (z_min_ = 10.0;; z_min_ *= 1.05) {
      int k = 1;
      double term = 1.0;
      for (; k <= 60; ++k) {
        term = std::abs(a[static_cast<std::size_t>(k)]) / std::pow(z_min_, k);
        if (term < 1e-17 || k > z_min_) break;
      }
      if (term < 1e-17) {
        terms_ = k;
        break;
      }
    }
    for (int k = 0; k < terms_; ++k) {
      const double sgn = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
      (k % 2 == 0 ? p_ : q_).push_back(sgn * a[static_cast<std::size_t>(k)]);
    }
    abs_a_.assign(a.begin(), a.begin() + terms_);
    for (double& x : abs_a_) x = std::abs(x);
    phase_ = (0.5 * nu + 0.25) * kPi;
  }

  double z_min() const { return z_min_; }
  double phase() const { return phase_; }

  // Terms of the series needed for 1e-17 at every argument >= z.
  int terms_for(double z) const {
    double zk = 1.0;
    for (int k = 1; k < terms_; ++k) {
      zk *= z;
      if (abs_a_[static_cast<std::size_t>(k)] / zk < 1e-17) return k;
    }
    return terms_;
  }

  // P + iQ from the first `terms` terms, with J_nu(z) = sqrt(2 / (pi z)) Re[(P + iQ) exp(i (z - phase()))].
  cplx pq(double z, int terms) const {
    const double w = 1.0 / (z * z);
    double P = 0.0, Q = 0.0;
    for (std::size_t j = static_cast<std::size_t>((terms + 1) / 2); j-- > 0;) P = P * w + p_[j];
    for (std::size_t j = static_cast<std::size_t>(terms / 2); j-- > 0;) Q = Q * w + q_[j];
    return {P, Q / z};
  }
  cplx pq(double z) const { return pq(z, terms_); }

  double operator()(double z) const {
    if (z < z_min_) return boost::math::cyl_bessel_j(nu_, z);
    return std::sqrt(2.0 / (kPi * z)) * std::real(pq(z) * std::polar(1.0, z - phase_));
  }

 private:
  int nu_;
  int terms_ = 0;
  double z_min_ = 0.0, phase_ = 0.0;
  std::vector<double> p_, q_, abs_a_;
};

// I(n, r, c) for holomorphic forms in closed form in tau. x runs over supp V, u = w^2 with w uniform over
// sqrt(supp V), v over supp U. Grids are sized for Y <= y_max and |N r / c| <= rho_max.
class DualKernel {
 public:
  DualKernel(const PipelineConfig& cfg, int level, int k, double y_max, double rho_max)
      : cfg_(cfg), level_(level), J_(k - 1), U_(make_window_u()), V_(make_window_v()) {
    const double K = cfg.K;
    const DaggerGrid gx(V_, DaggerGrid::nodes_for(V_, 4.5 * K, 0.0));
    x_ = gx.x();
    const Interval Iv = U_.support();
    const int nv = DaggerGrid::nodes_for(U_, rho_max + 2.0 * K, cfg.t);
    hv_ = Iv.width() / nv;
    v0_ = Iv.lo + hv_;
    for (int l = 1; l < nv; ++l) {
      const double v = Iv.lo + l * hv_;
      wv_.push_back(hv_ * U_(v) * std::polar(1.0, -cfg.t * std::log(v)));
    }
    const Interval I = V_.support();
    const double lo = std::sqrt(I.lo), hi = std::sqrt(I.hi);
    // Phase rates in w: 2 K x w from e(-K x w^2), 2 Y from the Bessel factor. V(w^2) has width 0.41 in w and
    // its spectrum falls below 1e-16 about 520 cycles (215 nodes) past the rate; 400 nodes of margin.
    const int nw = static_cast<int>(std::ceil((hi - lo) * (2.0 * y_max + 2.0 * K * I.hi * hi))) + 400;
    hw_ = (hi - lo) / nw;
    w0_ = lo + hw_;
    const std::size_t nx = x_.size();
    for (int l = 1; l < nw; ++l) {
      const double w = lo + l * hw_;
      ww_.push_back(4.0 * w * V_(w * w) * hw_);  // 2 w dw from u = w^2, 2 from 2 J
    }
    E_.assign(ww_.size() * nx, 0.0);
    for (std::size_t j = 0; j < ww_.size(); ++j) {
      const double w = w0_ + static_cast<double>(j) * hw_;
      for (std::size_t i = 0; i < nx; ++i) E_[j * nx + i] = gx.weight()[i] * e(-K * x_[i] * w * w);
    }
  }

  double rho(long r) const { return cfg_.N * static_cast<double>(r) / static_cast<double>(cfg_.c); }

  // U^dagger(N r / c - K x_i, 1 - it) at the x nodes.
  std::vector<cplx> column(long r) const {
    std::vector<cplx> a(x_.size());
    const long m = static_cast<long>(wv_.size());
    for (std::size_t i = 0; i < x_.size(); ++i) {
      const double rh = rho(r) - cfg_.K * x_[i];
      const cplx rot = e(-rh * hv_);
      cplx acc = 0.0;
      for (long l0 = 0; l0 < m; l0 += kBlock) {
        cplx ph = e(-rh * (v0_ + l0 * hv_));
        for (long l = l0; l < std::min(m, l0 + kBlock); ++l) {
          acc += wv_[static_cast<std::size_t>(l)] * ph;
          ph *= rot;
        }
      }
      a[i] = acc;
    }
    return a;
  }

  // R_j = ww_j sum_i E_ji a_i, so that I(Y) = sum_j R_j J_{k-1}(4 pi Y w_j).
  std::vector<cplx> fold(const std::vector<cplx>& a) const {
    const std::size_t nx = x_.size();
    std::vector<cplx> R(ww_.size());
    for (std::size_t j = 0; j < ww_.size(); ++j) {
      cplx acc = 0.0;
      for (std::size_t i = 0; i < nx; ++i) acc += E_[j * nx + i] * a[i];
      R[j] = acc * ww_[j];
    }
    return R;
  }

  cplx at(double Y, const std::vector<cplx>& R) const {
    const long m = static_cast<long>(R.size());
    const double zh = 4.0 * kPi * Y * hw_, z0 = 4.0 * kPi * Y * w0_;
    cplx acc = 0.0;
    long j = 0;
    for (; j < m && z0 + j * zh < J_.z_min(); ++j) acc += R[static_cast<std::size_t>(j)] * J_(z0 + j * zh);
    const cplx rot = std::polar(1.0, zh);
    cplx hank = 0.0;
    for (long j0 = j; j0 < m; j0 += kBlock) {
      cplx ph = std::polar(1.0, z0 + j0 * zh - J_.phase());
      const int terms = J_.terms_for(z0 + j0 * zh);
      for (long l = j0; l < std::min(m, j0 + kBlock); ++l) {
        const double z = z0 + l * zh;
        hank += R[static_cast<std::size_t>(l)] * (std::real(J_.pq(z, terms) * ph) / std::sqrt(z));
        ph *= rot;
      }
    }
    return acc + hank * std::sqrt(2.0 / kPi);
  }

  double Y(long n) const {
    return std::sqrt(static_cast<double>(n) * cfg_.N) / (static_cast<double>(cfg_.c) * std::sqrt(double(level_)));
  }

 private:
  PipelineConfig cfg_;
  int level_;
  BesselJ J_;
  SmoothWindow U_, V_;
  double v0_ = 0.0, hv_ = 0.0, w0_ = 0.0, hw_ = 0.0;
  std::vector<double> x_, ww_;
  std::vector<cplx> wv_, E_;
};

}  // namespace

cplx window_fourier(const SmoothWindow& V, double xi, double tol) {
  const Interval I = V.support();
  const auto r = integrate_1d([&](double x) { return V(x); }, [xi](double x) { return xi * x; }, I.lo, I.hi, tol);
  return require_within_budget(r).value;
}

cplx trivial_delta(long n, long q, double X, const SmoothWindow& V, double eps) {
  check_delta_args(q, X, eps);
  if (n % q != 0) return 0.0;
  return window_fourier(V, static_cast<double>(n) / X);
}

cplx trivial_delta_expanded(long n, long q, double X, const SmoothWindow& V, double eps) {
  check_delta_args(q, X, eps);
  cplx ch = 0.0;
  for (long a = 0; a < q; ++a) ch += e_frac(static_cast<long long>(n) * a, q);
  return ch / static_cast<double>(q) * window_fourier(V, static_cast<double>(n) / X);
}

PipelineConfig make_pipeline(double N, double t, double K, double P, int level, double eps) {
  PipelineConfig cfg;
  cfg.N = N;
  cfg.t = t;
  cfg.K = K;
  cfg.P = P;
  cfg.eps = eps;
  for (long p : primes_in(static_cast<long>(std::ceil(P)), static_cast<long>(std::floor(2.0 * P))))
    if (std::gcd(p, static_cast<long>(level)) == 1) cfg.primes.push_back(p);
  validate_pipeline(cfg, level);
  return cfg;
}

void validate_pipeline(const PipelineConfig& cfg, int level) {
  if (!(cfg.N > 0.0)) throw PreconditionError("pipeline: N must be positive");
  if (!(cfg.K > 0.0 && cfg.K < cfg.N)) throw PreconditionError("pipeline: requires 0 < K < N");
  if (cfg.primes.empty()) throw PreconditionError("pipeline: empty prime set");
  const double P = cfg.P > 0.0 ? cfg.P : static_cast<double>(*std::min_element(cfg.primes.begin(), cfg.primes.end()));
  if (!(P > std::pow(cfg.N, 1.0 + cfg.eps) / cfg.K)) throw PreconditionError("pipeline: requires P > N^{1+eps}/K");
  for (long p : cfg.primes) {
    if (!is_prime(p)) throw PreconditionError("pipeline: " + std::to_string(p) + " is not prime");
    if (std::gcd(p, static_cast<long>(level)) != 1) throw PreconditionError("pipeline: prime divides the level");
  }
  if (cfg.c != 1 && std::find(cfg.primes.begin(), cfg.primes.end(), cfg.c) == cfg.primes.end())
    throw PreconditionError("pipeline: c must be 1 or a member of the prime set");
}

cplx averaged_delta(long r, long n, const PipelineConfig& cfg, const SmoothWindow& V) {
  if (cfg.primes.empty()) throw PreconditionError("averaged_delta: empty prime set");
  const long d = r - n;
  long hits = 0;
  for (long p : cfg.primes)
    if (d % p == 0) ++hits;
  if (hits == 0) return 0.0;
  return static_cast<double>(hits) / static_cast<double>(cfg.primes.size()) *
         window_fourier(V, cfg.K * static_cast<double>(d) / cfg.N);
}

cplx averaged_delta_expanded(long r, long n, const PipelineConfig& cfg, const SmoothWindow& V) {
  if (cfg.primes.empty()) throw PreconditionError("averaged_delta: empty prime set");
  const long d = r - n;
  cplx acc = 0.0;
  for (long p : cfg.primes) {
    cplx ch = 0.0;
    for (long a = 0; a < p; ++a) ch += e_frac(static_cast<long long>(d) * a, p);
    acc += ch / static_cast<double>(p);
  }
  return acc / static_cast<double>(cfg.primes.size()) * window_fourier(V, cfg.K * static_cast<double>(d) / cfg.N);
}

cplx s_direct(const CuspForm& form, double N, double t, Exec exec) {
  const SmoothWindow V = make_window_v();
  const auto [r0, r1] = support_range(V, N);
  if (r1 > form.n_max()) throw RangeError("s_direct: form has too few coefficients");
  return chunked_sum(std::max(0L, r1 - r0 + 1), [&](long i) {
    const long r = r0 + i;
    return form.lam(r) * std::polar(1.0, -t * std::log(static_cast<double>(r))) * V(r / N);
  }, exec);
}

SplitResult s_split(const CuspForm& form, const PipelineConfig& cfg, Exec exec) {
  validate_pipeline(cfg, form.level);
  const SmoothWindow U = make_window_u(), V = make_window_v();
  SplitResult out;
  out.s = s_direct(form, cfg.N, cfg.t, exec);
  const auto [r0, r1] = support_range(U, cfg.N);
  const auto [n0, n1] = support_range(V, cfg.N);
  if (n1 > form.n_max()) throw RangeError("s_split: form has too few coefficients");
  const long R = std::max(0L, r1 - r0 + 1), M = std::max(0L, n1 - n0 + 1);
  for (long p : cfg.primes) out.terms += static_cast<double>(p) * R * M;
  if (out.terms > cfg.max_terms) throw BudgetExceeded("s_split: " + std::to_string(out.terms) + " terms");
  if (R == 0 || M == 0) return out;

  std::vector<cplx> a(R), b(M);
  for (long i = 0; i < R; ++i) {
    const double r = static_cast<double>(r0 + i);
    a[i] = std::polar(1.0, -cfg.t * std::log(r)) * U(r / cfg.N);
  }
  for (long j = 0; j < M; ++j) b[j] = form.lam(n0 + j) * V((n0 + j) / cfg.N);
  // phi[d - dmin] = int e(K d x / N) V(x) dx for d = r - n
  const long dmin = r0 - n1, dmax = r1 - n0;
  std::vector<cplx> phi(static_cast<std::size_t>(dmax - dmin + 1));
  for (long d = dmin; d <= dmax; ++d) phi[d - dmin] = window_fourier(V, cfg.K * static_cast<double>(d) / cfg.N);
  auto pair_sum = [&](auto&& weight) {
    cplx s = 0.0;
    for (long i = 0; i < R; ++i) {
      cplx inner = 0.0;
      for (long j = 0; j < M; ++j) {
        const long d = (r0 + i) - (n0 + j);
        inner += b[j] * weight(d) * phi[d - dmin];
      }
      s += a[i] * inner;
    }
    return s;
  };
  const double pstar = static_cast<double>(cfg.primes.size());

  // Double sum with the averaged delta in closed form.
  out.s_double = pair_sum([&](long d) {
                   long hits = 0;
                   for (long p : cfg.primes)
                     if (d % p == 0) ++hits;
                   return static_cast<double>(hits);
                 }) /
                 pstar;
  // alpha = 0 stratum.
  out.s_flat = pair_sum([](long) { return 1.0; }) * (inv_sum(cfg) / pstar);
  // alpha != 0, with the additive characters summed term by term.
  std::vector<std::pair<long, long>> jobs;
  for (long p : cfg.primes)
    for (long al = 1; al < p; ++al) jobs.emplace_back(p, al);
  const long nj = static_cast<long>(jobs.size());
  std::vector<cplx> part(jobs.size());
  auto run = [&](long k) {
    const auto [p, al] = jobs[static_cast<std::size_t>(k)];
    part[static_cast<std::size_t>(k)] =
        pair_sum([&](long d) { return e_frac(static_cast<long long>(d) * al, p); }) / static_cast<double>(p);
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (long k = 0; k < nj; ++k) run(k);
  } else {
    for (long k = 0; k < nj; ++k) run(k);
  }
  cplx star = 0.0;
  for (const cplx& v : part) star += v;
  out.s_star = star / pstar;
  out.residual = std::abs(out.s_double - out.s_star - out.s_flat) / (1.0 + std::abs(out.s_double));
  out.delta_error = std::abs(out.s - out.s_double);
  return out;
}

IDeltaValue i_delta_direct(long n, long r, long c, const GammaFactorKind& kind, int delta, const PipelineConfig& cfg,
                           int level) {
  validate_kind(kind);
  if (n < 1) throw PreconditionError("i_delta_direct: n must be positive");
  if (c < 1) throw PreconditionError("i_delta_direct: c must be positive");
  if (delta != 0 && delta != 1) throw PreconditionError("i_delta_direct: delta must be 0 or 1");
  GammaFactorKind g = kind;
  if (auto* m = std::get_if<Maass>(&g)) {
    m->delta = delta;
  } else if (delta != 0) {
    throw PreconditionError("i_delta_direct: holomorphic forms have delta = 0 only");
  }
  PipelineConfig local = cfg;
  local.c = c;
  const double T = cfg.tau_cut > 0.0 ? cfg.tau_cut : default_tau_cut(cfg);
  IDeltaValue out;
  cplx v[2];
  for (int pass = 0; pass < 2; ++pass) {
    const IKernel ker(local, level, T * (pass + 1), std::abs(r), g, Exec::Parallel);
    v[pass] = ker.at(ker.Y(n), ker.fold(ker.u_column(r), Exec::Parallel));
    if (pass == 0) out.tau_cut = ker.tau_cut();
  }
  out.value = v[0];
  out.doubled_change = std::abs(v[1] - v[0]);
  if (out.doubled_change > cfg.tol * std::max(std::abs(v[0]), 1e-300))
    out.warning = "doubling tau_cut moves I_delta by " + std::to_string(out.doubled_change);
  return out;
}

cplx i_star_direct(long r, long c, double tau, const PipelineConfig& cfg) {
  if (c < 1) throw PreconditionError("i_star_direct: c must be positive");
  const SmoothWindow U = make_window_u(), V = make_window_v();
  const double K = cfg.K, base = cfg.N * static_cast<double>(r) / static_cast<double>(c);
  const double rho_max = std::abs(base) + 2.0 * K;
  const DaggerGrid gx(V, DaggerGrid::nodes_for(V, 4.5 * K, 0.0));
  const DaggerGrid gu(U, DaggerGrid::nodes_for(U, rho_max, cfg.t));
  const DaggerGrid gv(V, DaggerGrid::nodes_for(V, 2.0 * K, 0.5 * std::abs(tau)));
  cplx acc = 0.0;
  for (std::size_t i = 0; i < gx.x().size(); ++i) {
    const double x = gx.x()[i];
    acc += gx.weight()[i] * gu(base - K * x, cplx(1.0, -cfg.t)) * gv(K * x, cplx(0.5, -0.5 * tau));
  }
  return acc;
}

IStarMain i_star_main(long r, long c, double tau, const PipelineConfig& cfg) {
  const double t = cfg.t, K = cfg.K, eps = cfg.eps, at = std::abs(tau);
  if (c < 1) throw PreconditionError("i_star_main: c must be positive");
  if (!(K < std::pow(t, 1.0 - eps))) throw PreconditionError("i_star_main: requires K < t^{1-eps}");
  if (!(t >= 20.0)) throw PreconditionError("i_star_main: requires t >= 20");
  if (!(at >= 40.0 && at < 2.0 * t)) throw PreconditionError("i_star_main: requires 40 <= |tau| < 2t");
  if (!(at > std::pow(K, 1.0 - eps) && at < 16.0 * kPi * K * std::pow(t, eps)))
    throw PreconditionError("i_star_main: tau outside the stationary band");
  const SmoothWindow U = make_window_u(), V = make_window_v();
  IStarMain out;
  const double base = cfg.N * static_cast<double>(r) / static_cast<double>(c);
  out.x0 = base * tau / ((tau + 2.0 * t) * K);
  const Interval I = V.support();
  if (!(out.x0 > I.lo && out.x0 < I.hi)) return out;
  const double rho = base - K * out.x0;
  out.f2 = (-t * K * K / (rho * rho) - tau / (2.0 * out.x0 * out.x0)) / kTwoPi;
  if (out.f2 == 0.0) throw DegenerateStationaryPoint("i_star_main: f''(x0) = 0");
  const cplx ud = u_dagger_asymptotic(U, rho, cplx(1.0, -t)).value;
  const cplx vd = u_dagger_asymptotic(V, K * out.x0, cplx(0.5, -0.5 * tau)).value;
  out.value = ud * vd * V(out.x0) * e(out.f2 > 0.0 ? 0.125 : -0.125) / std::sqrt(std::abs(out.f2));
  out.regime = Regime::Interior;
  return out;
}

cplx s_c_direct(const CuspForm& form, const PipelineConfig& cfg) {
  validate_pipeline(cfg, form.level);
  const SmoothWindow U = make_window_u(), V = make_window_v();
  const auto [r0, r1] = support_range(U, cfg.N);
  const auto [n0, n1] = support_range(V, cfg.N);
  if (n1 > form.n_max()) throw RangeError("s_c_direct: form has too few coefficients");
  std::map<long, cplx> phi;
  for (long d = r0 - n1; d <= r1 - n0; ++d) phi[d] = window_fourier(V, cfg.K * static_cast<double>(d) / cfg.N);
  cplx total = 0.0;
  for (long al = 0; al < cfg.c; ++al) {
    if (std::gcd(al, cfg.c) != 1) continue;
    cplx s = 0.0;
    for (long r = r0; r <= r1; ++r) {
      const cplx ar = std::polar(1.0, -cfg.t * std::log(static_cast<double>(r))) * U(r / cfg.N);
      cplx inner = 0.0;
      for (long n = n0; n <= n1; ++n)
        inner += form.lam(n) * V(n / cfg.N) * e_frac(static_cast<long long>(r - n) * al, cfg.c) * phi[r - n];
      s += ar * inner;
    }
    total += s;
  }
  return total * (inv_sum(cfg) / static_cast<double>(cfg.primes.size()));
}

namespace {

struct DualRun {
  cplx base{0.0, 0.0}, doubled{0.0, 0.0};
  long n_cut = 0, r_cut = 0;
  double n_envelope = 0.0;  // octave envelope of |I(n)| at n_cut relative to its peak
  std::string warning;
};

int holomorphic_weight(const CuspForm& form, const char* who) {
  const auto* h = std::get_if<Holomorphic>(&form.kind);
  if (h == nullptr) throw PreconditionError(std::string(who) + ": holomorphic forms only");
  return h->k;
}

DualRun dual_run(const CuspForm& form, const PipelineConfig& cfg, bool doubling, Exec exec) {
  validate_pipeline(cfg, form.level);
  const int k = holomorphic_weight(form, "s_c_dual");
  const long c = cfg.c, M = form.level, mult = doubling ? 2 : 1;
  const double tol = cfg.trunc_tol;
  if (!(tol > 0.0 && tol < 1.0)) throw PreconditionError("s_c_dual: trunc_tol must lie in (0, 1)");
  const double y_max = std::sqrt(static_cast<double>(form.n_max()) * cfg.N) / (c * std::sqrt(double(M)));
  // U^dagger(rho, 1 - it) is stationary for |rho| <= t / (2 pi a_U); the ramps of U have width 1/2.
  const double rho_stat = std::abs(cfg.t) / (kTwoPi * make_window_u().support().lo) + cfg.K * make_window_v().support().hi;
  const double rho_cap = cfg.r_cut > 0 ? cfg.N * static_cast<double>(mult * cfg.r_cut) / c
                                       : static_cast<double>(mult) * (rho_stat + 2.0 * spectral_reach(0.5, tol));
  const DualKernel ker(cfg, static_cast<int>(M), k, y_max, rho_cap);

  std::map<long, std::vector<cplx>> cols;
  auto compute = [&](const std::vector<long>& rs) {
    std::vector<std::vector<cplx>> out(rs.size());
    const long m = static_cast<long>(rs.size());
    auto one = [&](long i) { out[static_cast<std::size_t>(i)] = ker.column(rs[static_cast<std::size_t>(i)]); };
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
      for (long i = 0; i < m; ++i) one(i);
    } else {
      for (long i = 0; i < m; ++i) one(i);
    }
    for (std::size_t i = 0; i < rs.size(); ++i) cols[rs[i]] = std::move(out[i]);
  };
  auto env = [](const std::vector<cplx>& a) {
    double m = 0.0;
    for (const cplx& z : a) m = std::max(m, std::abs(z));
    return m;
  };

  DualRun run;
  if (cfg.r_cut > 0) {
    run.r_cut = cfg.r_cut;
  } else {
    // Scan |r| outwards in batches until a whole batch past the stationary range is below tol * peak. The
    // columns flatten at a rounding floor near 1.5e-14 of their peak, so the level is at least 1e-13.
    const double level = std::max(tol, 1e-13);
    const long batch = std::max(8L, c);
    double peak = 0.0;
    long last_above = 0;
    for (long d0 = 0;; d0 += batch) {
      if (ker.rho(mult * (d0 + batch)) > rho_cap)
        throw TruncationInsufficient("s_c_dual: U^dagger envelope does not fall below trunc_tol within the grid");
      std::vector<long> rs;
      for (long d = d0; d < d0 + batch; ++d) {
        rs.push_back(d);
        if (d > 0) rs.push_back(-d);
      }
      compute(rs);
      for (long r : rs) peak = std::max(peak, env(cols[r]));
      bool quiet = ker.rho(d0) > rho_stat;
      for (long r : rs) {
        if (env(cols[r]) >= level * peak) {
          last_above = std::max(last_above, std::abs(r));
          quiet = false;
        }
      }
      if (quiet) break;
    }
    run.r_cut = last_above + 1;
  }
  {
    std::vector<long> rs;
    for (long r = -mult * run.r_cut; r <= mult * run.r_cut; ++r)
      if (std::gcd(r, c) == 1 && !cols.count(r)) rs.push_back(r);
    compute(rs);
  }

  // H_m = sum over residues b of r of e(-conj(bM) m / c) fold(sum_{r = b} column(r)), for n = m mod c.
  auto twisted = [&](long r_cut) {
    std::vector<std::vector<cplx>> cls(static_cast<std::size_t>(c));
    for (long r = -r_cut; r <= r_cut; ++r) {
      if (std::gcd(r, c) != 1) continue;
      const auto& col = cols.at(r);
      auto& acc = cls[static_cast<std::size_t>(mod(r, c))];
      if (acc.empty()) acc.assign(col.size(), 0.0);
      for (std::size_t i = 0; i < col.size(); ++i) acc[i] += col[i];
    }
    std::vector<std::vector<cplx>> H(static_cast<std::size_t>(c));
    for (long b = 0; b < c; ++b) {
      if (cls[static_cast<std::size_t>(b)].empty()) continue;
      const auto R = ker.fold(cls[static_cast<std::size_t>(b)]);
      const long rbar = inverse_mod(mod(static_cast<long long>(b) * M, c), c);
      for (long m = 0; m < c; ++m) {
        auto& out = H[static_cast<std::size_t>(m)];
        if (out.empty()) out.assign(R.size(), 0.0);
        const cplx w = e_frac(-static_cast<long long>(rbar) * m, c);
        for (std::size_t j = 0; j < R.size(); ++j) out[j] += w * R[j];
      }
    }
    return H;
  };
  const auto H = twisted(run.r_cut);
  auto term = [&](const std::vector<std::vector<cplx>>& h, long n) {
    const auto& Hm = h[static_cast<std::size_t>(n % c)];
    return Hm.empty() ? cplx(0.0) : ker.at(ker.Y(n), Hm);
  };

  if (cfg.n_cut > 0) {
    run.n_cut = cfg.n_cut;
  } else {
    // One-octave envelopes of |I(n)| sampled at up to 256 points; cut at the first octave after which every
    // envelope is below tol * peak, confirmed over two further octaves. Without room for that in the stored
    // coefficients, n_cut is clipped to what they allow and a warning is set.
    const long n_room = form.n_max() / mult;
    double peak = 0.0;
    std::vector<double> envs;
    for (int j = 0;; ++j) {
      const long lo = 1L << j, hi = 2 * lo;
      if (hi > n_room) {
        run.n_cut = n_room;
        run.n_envelope = envs.empty() ? 1.0 : envs.back() / peak;
        char buf[160];
        std::snprintf(buf, sizeof buf, "n_cut clipped to %ld by the stored coefficients; the last octave envelope of |I(n)| below it is %.2e of the peak",
                      n_room, run.n_envelope);
        run.warning = buf;
        break;
      }
      const long step = std::max(1L, lo / 256);
      double e = 0.0;
      for (long n = lo; n < hi; n += step) e = std::max(e, std::abs(term(H, n)));
      envs.push_back(e);
      peak = std::max(peak, e);
      const int J = static_cast<int>(envs.size());
      if (J >= 3 && envs[J - 1] < tol * peak && envs[J - 2] < tol * peak && envs[J - 3] < tol * peak) {
        int first = J - 3;
        while (first > 0 && envs[static_cast<std::size_t>(first - 1)] < tol * peak) --first;
        run.n_cut = 1L << first;
        run.n_envelope = envs[static_cast<std::size_t>(first)] / peak;
        break;
      }
    }
  }
  if (mult * run.n_cut > form.n_max())
    throw RangeError("s_c_dual: needs " + std::to_string(mult * run.n_cut) + " coefficients");

  const cplx pref = kPi * std::pow(kI, k) * form.eta_M * form.chi_at(-c) * cfg.N * cfg.N *
                    std::polar(1.0, -cfg.t * std::log(cfg.N)) / (static_cast<double>(c) * std::sqrt(double(M))) *
                    (inv_sum(cfg) / static_cast<double>(cfg.primes.size()));
  auto total = [&](const std::vector<std::vector<cplx>>& h, long n_cut) {
    return pref * chunked_sum(n_cut, [&](long i) { return form.lam(i + 1) * term(h, i + 1); }, exec);
  };
  run.base = total(H, run.n_cut);
  if (doubling) run.doubled = total(twisted(2 * run.r_cut), 2 * run.n_cut);
  return run;
}

}  // namespace

cplx i_delta_bessel(long n, long r, long c, int k, const PipelineConfig& cfg, int level) {
  if (n < 1) throw PreconditionError("i_delta_bessel: n must be positive");
  if (c < 1) throw PreconditionError("i_delta_bessel: c must be positive");
  if (k < 2 || k % 2 != 0) throw PreconditionError("i_delta_bessel: weight must be even and positive");
  PipelineConfig local = cfg;
  local.c = c;
  const double Y = std::sqrt(static_cast<double>(n) * cfg.N) / (c * std::sqrt(double(level)));
  const DualKernel ker(local, level, k, Y, std::abs(cfg.N * static_cast<double>(r) / c));
  return ker.at(Y, ker.fold(ker.column(r)));
}

cplx s_c_dual(const CuspForm& form, const PipelineConfig& cfg, Exec exec) {
  return dual_run(form, cfg, false, exec).base;
}

DualIdentityReport dual_identity_check(const CuspForm& form, const PipelineConfig& cfg, bool with_doubling,
                                       Exec exec) {
  DualIdentityReport rep;
  const DualRun run = dual_run(form, cfg, with_doubling, exec);
  rep.n_cut = run.n_cut;
  rep.r_cut = run.r_cut;
  rep.n_envelope = run.n_envelope;
  rep.warning = run.warning;
  rep.direct = s_c_direct(form, cfg);
  rep.dual = run.base;
  const double scale = std::max(std::abs(rep.direct), 1e-300);
  rep.residual = std::abs(rep.direct - rep.dual) / scale;
  if (with_doubling) {
    rep.dual_doubled = run.doubled;
    rep.doubled_change = std::abs(rep.dual_doubled - rep.dual) / scale;
    rep.stable = rep.doubled_change < rep.residual / 2.0;
  }
  return rep;
}

}  // namespace weyl
