#include "weyl/oscillate.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <queue>

#include "weyl/error.hpp"
#include "weyl/fit.hpp"

namespace weyl {
namespace {

// Gauss-Kronrod 7/15 nodes on [0, 1] of the symmetric rule (positive half, centre last).
constexpr std::array<double, 8> kXgk = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                        0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                        0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                       0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

std::atomic<std::size_t> g_default_budget{kDefaultCellBudget};

struct Cell {
  double a, b;
  cplx value;
  double err;
  bool at_floor;  // error estimate is pure rounding; splitting cannot help
  double floor;
};

double rounding_floor(double resabs) { return 50.0 * std::numeric_limits<double>::epsilon() * resabs; }

double quadpack_error(double diff, double resabs, double resasc) {
  double err = diff;
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  return std::max(err, rounding_floor(resabs));
}

Cell gk15(const ComplexFn& h, double a, double b) {
  const double c = 0.5 * (a + b), hw = 0.5 * (b - a);
  std::array<cplx, 15> v;
  v[7] = h(c);
  for (int j = 0; j < 7; ++j) {
    v[j] = h(c - hw * kXgk[j]);
    v[14 - j] = h(c + hw * kXgk[j]);
  }
  cplx k = v[7] * kWgk[7];
  cplx g = v[7] * kWg[3];
  for (int j = 0; j < 7; ++j) {
    k += (v[j] + v[14 - j]) * kWgk[j];
    if (j % 2 == 1) g += (v[j] + v[14 - j]) * kWg[j / 2];
  }
  // QUADPACK-style error estimate, applied to the real and imaginary parts separately.
  double err = 0.0, floor = 0.0;
  for (int part = 0; part < 2; ++part) {
    auto comp = [&](int i) { return part == 0 ? v[i].real() : v[i].imag(); };
    const double kk = part == 0 ? k.real() : k.imag();
    const double mean = 0.5 * kk;
    double resabs = std::abs(comp(7)) * kWgk[7], resasc = std::abs(comp(7) - mean) * kWgk[7];
    for (int j = 0; j < 7; ++j) {
      resabs += (std::abs(comp(j)) + std::abs(comp(14 - j))) * kWgk[j];
      resasc += (std::abs(comp(j) - mean) + std::abs(comp(14 - j) - mean)) * kWgk[j];
    }
    const double gg = part == 0 ? g.real() : g.imag();
    err += quadpack_error(std::abs((kk - gg) * hw), resabs * hw, resasc * hw);
    floor += rounding_floor(resabs * hw);
  }
  return {a, b, k * hw, err, err <= floor * (1.0 + 1e-12), floor};
}

OscillatoryResult adaptive(const ComplexFn& h, std::vector<std::pair<double, double>> seeds, double tol,
                           const QuadratureOptions& opt) {
  OscillatoryResult out;
  if (!(tol > 0.0)) throw PreconditionError("quadrature tolerance must be positive");
  if (seeds.size() > opt.max_cells) {
    seeds.resize(opt.max_cells);
    out.budget_exceeded = true;
  }
  std::vector<Cell> cells(seeds.size());
  const long n = static_cast<long>(seeds.size());
  if (opt.exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) cells[i] = gk15(h, seeds[i].first, seeds[i].second);
  } else {
    for (long i = 0; i < n; ++i) cells[i] = gk15(h, seeds[i].first, seeds[i].second);
  }
  auto cmp = [&](std::size_t i, std::size_t j) {
    if (cells[i].err != cells[j].err) return cells[i].err < cells[j].err;
    return cells[i].a > cells[j].a;
  };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(cmp)> heap(cmp);
  // Rounding floors cannot be refined away, so only the excess over them counts against tol.
  double total = 0.0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!cells[i].at_floor) heap.push(i);
    total += cells[i].err - cells[i].floor;
  }
  while (total > tol && !heap.empty()) {
    if (cells.size() + 1 > opt.max_cells) {
      out.budget_exceeded = true;
      break;
    }
    const std::size_t i = heap.top();
    heap.pop();
    const Cell c = cells[i];
    const double m = 0.5 * (c.a + c.b);
    if (!(m > c.a && m < c.b)) continue;  // cannot split further
    cells[i] = gk15(h, c.a, m);
    cells.push_back(gk15(h, m, c.b));
    total += (cells[i].err - cells[i].floor) + (cells.back().err - cells.back().floor) - (c.err - c.floor);
    if (!cells[i].at_floor) heap.push(i);
    if (!cells.back().at_floor) heap.push(cells.size() - 1);
  }
  std::sort(cells.begin(), cells.end(), [](const Cell& x, const Cell& y) { return x.a < y.a; });
  for (const Cell& c : cells) {
    out.value += c.value;
    out.abs_error_estimate += c.err;
  }
  out.cells = cells.size();
  return out;
}

// Split [a, b] until f changes by at most half a period across each piece.
void seed_by_phase(const RealFn& f, double a, double fa, double b, double fb, int depth,
                   std::vector<std::pair<double, double>>& out, std::size_t limit) {
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const bool fine = std::abs(fb - fa) <= 0.5 && std::abs(fm - 0.5 * (fa + fb)) <= 0.125;
  if (fine || depth >= 48 || out.size() >= limit) {
    out.emplace_back(a, b);
    return;
  }
  seed_by_phase(f, a, fa, m, fm, depth + 1, out, limit);
  seed_by_phase(f, m, fm, b, fb, depth + 1, out, limit);
}

}  // namespace

void set_default_cell_budget(std::size_t cells) {
  if (cells == 0) throw PreconditionError("cell budget must be positive");
  g_default_budget = cells;
}
std::size_t default_cell_budget() { return g_default_budget; }
QuadratureOptions default_quadrature_options() { return {default_cell_budget(), Exec::Serial}; }

const OscillatoryResult& require_within_budget(const OscillatoryResult& r) {
  if (r.budget_exceeded) throw BudgetExceeded("oscillatory quadrature exceeded its cell budget");
  return r;
}

OscillatoryResult integrate_1d(const RealFn& g, const RealFn& f, double a, double b, double tol,
                               const QuadratureOptions& opt) {
  if (!(b > a)) return {};
  std::vector<std::pair<double, double>> seeds;
  constexpr int kPre = 16;
  const double h = (b - a) / kPre;
  double x0 = a, f0 = f(a);
  for (int i = 1; i <= kPre; ++i) {
    const double x1 = i == kPre ? b : a + i * h;
    const double f1 = f(x1);
    seed_by_phase(f, x0, f0, x1, f1, 0, seeds, opt.max_cells + 1);
    x0 = x1;
    f0 = f1;
  }
  return adaptive([&](double x) { return g(x) * e(f(x)); }, std::move(seeds), tol, opt);
}

OscillatoryResult integrate_complex(const ComplexFn& h, double a, double b, double tol, double cycles_per_unit,
                                    const QuadratureOptions& opt) {
  if (!(b > a)) return {};
  const double want = std::ceil((b - a) * std::max(cycles_per_unit, 0.0)) + 1.0;
  const std::size_t n = static_cast<std::size_t>(std::min(want, static_cast<double>(opt.max_cells) + 1.0));
  std::vector<std::pair<double, double>> seeds;
  seeds.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    seeds.emplace_back(a + (b - a) * i / n, i + 1 == n ? b : a + (b - a) * (i + 1) / n);
  return adaptive(h, std::move(seeds), tol, opt);
}

double sampled_scale_constant(const PhaseProfile& p, int samples) {
  double c = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double x = p.a + (p.b - p.a) * s / (samples - 1);
    for (int i = 1; i <= 4; ++i)
      c = std::max(c, std::abs(p.f(x, i)) * std::pow(p.omega_f, i) / p.theta_f);
    for (int j = 0; j <= 2; ++j) c = std::max(c, std::abs(p.g(x, j)) * std::pow(p.omega_g, j));
  }
  return c;
}

double sampled_min_fprime(const PhaseProfile& p, int samples) {
  double m = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) m = std::min(m, std::abs(p.f(p.a + (p.b - p.a) * s / (samples - 1), 1)));
  return m;
}

namespace {

// D^j g at x with D h = (h / f')'.
double ibp_derivative(const PhaseProfile& p, int j, double x) {
  std::array<double, Jet::kMax + 1> gd{}, fd{};
  for (int k = 0; k <= j; ++k) {
    gd[k] = p.g(x, k);
    fd[k] = p.f(x, k + 1);
  }
  Jet h = Jet::from_derivatives(gd, j);
  const Jet fp = Jet::from_derivatives(fd, j);
  for (int step = 0; step < j; ++step) {
    const Jet q = h / fp;
    Jet d(q.n - 1);
    for (int k = 1; k <= q.n; ++k) d.a[k - 1] = k * q.a[k];
    h = d;
  }
  return h.value();
}

}  // namespace

double ibp_majorant(const PhaseProfile& p, int j, int samples) {
  if (j < 0 || j > 8) throw PreconditionError("ibp_majorant: j out of range");
  const double h = (p.b - p.a) / (samples - 1);
  double s = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double w = (i == 0 || i == samples - 1) ? 0.5 : 1.0;
    s += w * std::abs(ibp_derivative(p, j, p.a + i * h));
  }
  return s * h / std::pow(kTwoPi, j);
}

DecayProbeResult decay_probe(const std::function<PhaseProfile(double)>& family, std::span<const double> B_values,
                             int j, double tol) {
  if (j < 0 || j > 4) throw PreconditionError("decay_probe: j must lie in 0..4");
  if (B_values.size() < 2) throw PreconditionError("decay_probe: need at least two B values");
  DecayProbeResult r;
  for (double B : B_values) {
    const PhaseProfile p = family(B);
    if (sampled_min_fprime(p) < B * (1.0 - 1e-12))
      throw PreconditionError("decay_probe: sampled |f'| dips below B");
    const auto I = require_within_budget(integrate_1d([&](double x) { return p.g(x, 0); },
                                                      [&](double x) { return p.f(x, 0); }, p.a, p.b, tol));
    const double bound = ibp_majorant(p, j);
    r.B.push_back(B);
    r.integral_abs.push_back(std::abs(I.value));
    r.bound.push_back(bound);
    if (std::abs(I.value) > bound * (1.0 + 1e-6) + I.abs_error_estimate) r.bound_holds = false;
  }
  r.bound_slope = fit_loglog(r.B, r.bound).slope;
  std::vector<double> ia(r.integral_abs);
  for (double& v : ia) v = std::max(v, std::numeric_limits<double>::min());
  r.actual_slope = fit_loglog(r.B, ia).slope;
  r.realized = r.bound_slope <= -j + 0.2;
  return r;
}

OscillatoryResult integrate_2d(const RealFn2& g2, const RealFn2& f2, const Rect& rect, double tol,
                               const QuadratureOptions& opt) {
  // Oscillation rate in y from a coarse sample of the phase.
  double rate = 0.0;
  constexpr int kS = 33;
  const double hy = (rect.y1 - rect.y0) / (kS - 1);
  for (int i = 0; i < kS; ++i) {
    const double x = rect.x0 + (rect.x1 - rect.x0) * i / (kS - 1);
    for (int k = 0; k + 1 < kS; ++k) {
      const double y = rect.y0 + k * hy;
      rate = std::max(rate, std::abs(f2(x, y + hy) - f2(x, y)) / hy);
    }
  }
  std::atomic<std::size_t> inner_cells{0};
  std::atomic<bool> inner_over{false};
  const double inner_tol = tol / (4.0 * (rect.y1 - rect.y0) + 1e-300);
  QuadratureOptions inner = opt;
  inner.exec = Exec::Serial;
  auto outer = integrate_complex(
      [&](double y) {
        const auto r = integrate_1d([&](double x) { return g2(x, y); }, [&](double x) { return f2(x, y); }, rect.x0,
                                    rect.x1, inner_tol, inner);
        inner_cells += r.cells;
        if (r.budget_exceeded) inner_over = true;
        return r.value;
      },
      rect.y0, rect.y1, 0.5 * tol, rate, opt);
  outer.cells += inner_cells;
  outer.budget_exceeded = outer.budget_exceeded || inner_over;
  outer.abs_error_estimate += 0.5 * tol;
  return outer;
}

double total_variation(const RealFn2& g_xy, const Rect& rect, int samples) {
  const double hx = (rect.x1 - rect.x0) / (samples - 1), hy = (rect.y1 - rect.y0) / (samples - 1);
  double s = 0.0;
  for (int i = 0; i < samples; ++i)
    for (int k = 0; k < samples; ++k) {
      const double w = ((i == 0 || i == samples - 1) ? 0.5 : 1.0) * ((k == 0 || k == samples - 1) ? 0.5 : 1.0);
      s += w * std::abs(g_xy(rect.x0 + i * hx, rect.y0 + k * hy));
    }
  return s * hx * hy;
}

double condition_constant(const RealFn2& f_xx, const RealFn2& f_yy, const RealFn2& f_xy, const Rect& rect, double r1,
                          double r2, int samples) {
  double c = std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i)
    for (int k = 0; k < samples; ++k) {
      const double x = rect.x0 + (rect.x1 - rect.x0) * i / (samples - 1);
      const double y = rect.y0 + (rect.y1 - rect.y0) * k / (samples - 1);
      const double a = f_xx(x, y), b = f_yy(x, y), m = f_xy(x, y);
      c = std::min({c, a / (r1 * r1), b / (r2 * r2), (a * b - m * m) / (r1 * r2)});
    }
  return c;
}

}  // namespace weyl
