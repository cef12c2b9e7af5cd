#include "weyl/testfn.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "weyl/error.hpp"

namespace weyl {
namespace {

constexpr int kMaxOrder = Jet::kMax;

// psi^{(n)} = psi * P_n / w^{2n}, w = 1 - x^2, P_{n+1} = w^2 P_n' + (4 n x w - 2 x) P_n.
struct BumpPolys {
  std::array<std::vector<double>, kMaxOrder + 1> p;
  BumpPolys() {
    p[0] = {1.0};
    for (int n = 0; n < kMaxOrder; ++n) {
      const auto& a = p[n];
      std::vector<double> out(a.size() + 3, 0.0);
      // w^2 = 1 - 2x^2 + x^4 times P_n'
      for (std::size_t i = 1; i < a.size(); ++i) {
        const double d = a[i] * static_cast<double>(i);
        out[i - 1] += d;
        out[i + 1] -= 2.0 * d;
        out[i + 3] += d;
      }
      // (4n x (1 - x^2) - 2x) P_n = ((4n - 2) x - 4n x^3) P_n
      for (std::size_t i = 0; i < a.size(); ++i) {
        out[i + 1] += (4.0 * n - 2.0) * a[i];
        out[i + 3] -= 4.0 * n * a[i];
      }
      while (out.size() > 1 && out.back() == 0.0) out.pop_back();
      p[n + 1] = std::move(out);
    }
  }
};

const BumpPolys& polys() {
  static const BumpPolys P;
  return P;
}

double horner(const std::vector<double>& c, double x) {
  double s = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * x + *it;
  return s;
}

// 8-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 8> kGLx = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                        -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                        0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGLw = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                        0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                        0.2223810344533745, 0.1012285362903763};

double gl8(double a, double b) {
  const double m = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < 8; ++i) s += kGLw[i] * bump(m + h * kGLx[i]);
  return s * h;
}

// Cumulative bump integrals from each end on a uniform grid over [-1, 1].
struct BumpTable {
  static constexpr int kCells = 2048;
  std::vector<double> left, right;
  double mass = 0.0;
  BumpTable() : left(kCells + 1, 0.0), right(kCells + 1, 0.0) {
    const double h = 2.0 / kCells;
    for (int i = 0; i < kCells; ++i) left[i + 1] = left[i] + gl8(-1.0 + i * h, -1.0 + (i + 1) * h);
    for (int i = kCells; i > 0; --i) right[i - 1] = right[i] + gl8(-1.0 + (i - 1) * h, -1.0 + i * h);
    mass = left[kCells];
  }
  int cell(double v) const { return std::clamp(static_cast<int>((v + 1.0) * (0.5 * kCells)), 0, kCells - 1); }
  // Integral of bump over (-1, v).
  double lower(double v) const {
    const int i = cell(v);
    return left[i] + gl8(-1.0 + i * (2.0 / kCells), v);
  }
  // Integral of bump over (v, 1).
  double upper(double v) const {
    const int i = cell(v);
    return gl8(v, -1.0 + (i + 1) * (2.0 / kCells)) + right[i + 1];
  }
};

const BumpTable& table() {
  static const BumpTable T;
  return T;
}

}  // namespace

double bump(double x) { return bump_derivative(x, 0); }

double bump_derivative(double x, int order) {
  if (order < 0 || order > kMaxOrder) throw PreconditionError("bump_derivative: order out of range");
  if (!(std::abs(x) < 1.0)) return 0.0;
  const double w = (1.0 - x) * (1.0 + x);
  const double ex = -1.0 / w - 2.0 * order * std::log(w);
  return horner(polys().p[order], x) * std::exp(ex);
}

double bump_mass() { return table().mass; }

double smooth_step(double y) {
  if (y <= 0.0) return 0.0;
  if (y >= 1.0) return 1.0;
  const auto& T = table();
  const double v = 2.0 * y - 1.0;
  if (v <= 0.0) return T.lower(v) / T.mass;
  return 1.0 - T.upper(v) / T.mass;
}

double smooth_step_derivative(double y, int order) {
  if (order == 0) return smooth_step(y);
  if (y <= 0.0 || y >= 1.0) return 0.0;
  return std::ldexp(bump_derivative(2.0 * y - 1.0, order - 1), order) / table().mass;
}

SmoothWindow::SmoothWindow(Interval support, Evaluator eval, Normalization norm, int j_max,
                           std::optional<Interval> plateau)
    : support_(support),
      eval_(std::make_shared<const Evaluator>(std::move(eval))),
      norm_(norm),
      j_max_(j_max),
      plateau_(plateau) {
  if (!(support.lo > 0.0 && support.hi > support.lo))
    throw PreconditionError("SmoothWindow: support must satisfy 0 < a < b");
}

SmoothWindow SmoothWindow::zero(Interval support) {
  SmoothWindow w(support, [](double, int) { return 0.0; }, Normalization::Generic, kMaxOrder);
  w.zero_ = true;
  return w;
}

double SmoothWindow::derivative(double x, int order) const {
  if (order < 0 || order > j_max_) throw PreconditionError("SmoothWindow: derivative order exceeds J_max");
  if (!(x > support_.lo && x < support_.hi)) return 0.0;
  return (*eval_)(x, order);
}

Jet SmoothWindow::jet(double x, int order) const {
  std::array<double, Jet::kMax + 1> d{};
  for (int k = 0; k <= order; ++k) d[k] = derivative(x, k);
  return Jet::from_derivatives(d, order);
}

SmoothWindow SmoothWindow::dilate(double lambda) const {
  if (!(lambda > 0.0)) throw PreconditionError("SmoothWindow::dilate: lambda must be positive");
  auto inner = eval_;
  SmoothWindow w(
      {support_.lo * lambda, support_.hi * lambda},
      [inner, lambda](double x, int j) { return (*inner)(x / lambda, j) * std::pow(lambda, -j); },
      norm_ == Normalization::UnitIntegral ? Normalization::Generic : norm_, j_max_,
      plateau_ ? std::optional<Interval>({plateau_->lo * lambda, plateau_->hi * lambda}) : std::nullopt);
  w.zero_ = zero_;
  return w;
}

SmoothWindow SmoothWindow::scaled(double c) const {
  auto inner = eval_;
  SmoothWindow w(support_, [inner, c](double x, int j) { return c * (*inner)(x, j); }, Normalization::Generic,
                 j_max_);
  w.zero_ = zero_ || c == 0.0;
  return w;
}

SmoothWindow operator+(const SmoothWindow& a, const SmoothWindow& b) {
  const Interval sa = a.support_, sb = b.support_;
  auto ea = a.eval_, eb = b.eval_;
  SmoothWindow w(
      {std::min(sa.lo, sb.lo), std::max(sa.hi, sb.hi)},
      [=](double x, int j) {
        double s = 0.0;
        if (x > sa.lo && x < sa.hi) s += (*ea)(x, j);
        if (x > sb.lo && x < sb.hi) s += (*eb)(x, j);
        return s;
      },
      Normalization::Generic, std::min(a.j_max_, b.j_max_));
  w.zero_ = a.zero_ && b.zero_;
  return w;
}

double SmoothWindow::derivative_bound(int j, int samples) const {
  double m = 0.0;
  const double h = support_.width() / (samples - 1);
  for (int i = 1; i + 1 < samples; ++i) m = std::max(m, std::abs(derivative(support_.lo + i * h, j)));
  return m * std::pow(support_.width(), j);
}

SmoothWindow make_window_v() {
  const double half_mass = 0.5 * bump_mass();
  return SmoothWindow(
      {1.0, 2.0},
      [half_mass](double x, int j) { return std::ldexp(bump_derivative(2.0 * x - 3.0, j), j) / half_mass; },
      Normalization::UnitIntegral, kMaxOrder);
}

SmoothWindow make_window_u() {
  return SmoothWindow(
      {0.5, 2.5},
      [](double x, int j) {
        if (x >= 1.0 && x <= 2.0) return j == 0 ? 1.0 : 0.0;
        if (x < 1.0) return std::ldexp(smooth_step_derivative(2.0 * x - 1.0, j), j);
        const double d = std::ldexp(smooth_step_derivative(5.0 - 2.0 * x, j), j);
        return (j % 2 == 0) ? d : -d;
      },
      Normalization::Plateau, kMaxOrder, Interval{1.0, 2.0});
}

namespace {

// Smooth step in the log2 variable rising on [start, start + width].
struct LogStep {
  double start;
  double width;
  void derivatives(double ell, int order, std::array<double, Jet::kMax + 1>& d) const {
    const double y = (ell - start) / width;
    double scale = 1.0;
    for (int k = 0; k <= order; ++k) {
      d[k] = smooth_step_derivative(y, k) * scale;
      scale /= width;
    }
  }
};

}  // namespace

std::vector<SmoothWindow> make_dyadic_partition(double lo, double hi) {
  if (!(lo > 0.0 && hi > lo)) throw PreconditionError("make_dyadic_partition: requires 0 < lo < hi");
  if (hi / lo < 2.0) throw PreconditionError("make_dyadic_partition: degenerate interval, hi/lo < 2");
  const double L = std::log2(hi / lo);
  const int m = static_cast<int>(std::ceil(L - 1e-12));
  const double edge = -std::log2(1.0 - kPartitionEta);
  constexpr double kInnerWidth = 0.5;

  std::vector<LogStep> steps;
  steps.push_back({-edge, edge});
  for (int j = 1; j < m; ++j) steps.push_back({j * L / m - 0.5 * kInnerWidth, kInnerWidth});
  steps.push_back({L, edge});

  std::vector<SmoothWindow> out;
  for (int j = 0; j < m; ++j) {
    const LogStep up = steps[j], down = steps[j + 1];
    const double a = lo * std::exp2(up.start);
    const double b = lo * std::exp2(down.start + down.width);
    out.emplace_back(
        Interval{a, b},
        [=](double y, int order) {
          const Jet ell = compose(
              [&] {
                // log2(y / lo) and its derivatives in y
                std::array<double, Jet::kMax + 1> d{};
                d[0] = std::log2(y / lo);
                double p = 1.0 / (y * std::numbers::ln2);
                for (int k = 1; k <= order; ++k) {
                  d[k] = p;
                  p *= -static_cast<double>(k) / y;
                }
                return d;
              }(),
              Jet::variable(y, order));
          std::array<double, Jet::kMax + 1> du{}, dd{};
          up.derivatives(ell.value(), order, du);
          down.derivatives(ell.value(), order, dd);
          return (compose(du, ell) - compose(dd, ell)).derivative(order);
        },
        Normalization::PartitionMember, kMaxOrder);
  }
  return out;
}

}  // namespace weyl
