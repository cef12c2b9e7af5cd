#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "weyl/common.hpp"
#include "weyl/jet.hpp"

namespace weyl {

// exp(-1/(1-x^2)) on (-1,1) and its derivatives, exact up to rounding.
double bump(double x);
double bump_derivative(double x, int order);
// Integral of bump over (-1,1).
double bump_mass();

// Smooth step: 0 for y <= 0, 1 for y >= 1, built from the normalized bump integral.
double smooth_step(double y);
double smooth_step_derivative(double y, int order);

enum class Normalization { UnitIntegral, Plateau, PartitionMember, Generic };

class SmoothWindow {
 public:
  // eval(x, j) returns the j-th derivative at x for x strictly inside the support.
  using Evaluator = std::function<double(double, int)>;

  static constexpr int kDefaultJMax = 8;

  SmoothWindow(Interval support, Evaluator eval, Normalization norm, int j_max,
               std::optional<Interval> plateau = std::nullopt);

  static SmoothWindow zero(Interval support);

  double operator()(double x) const { return derivative(x, 0); }
  double derivative(double x, int order) const;
  Jet jet(double x, int order) const;

  Interval support() const { return support_; }
  Normalization normalization() const { return norm_; }
  int j_max() const { return j_max_; }
  std::optional<Interval> plateau() const { return plateau_; }
  bool is_zero() const { return zero_; }

  // x -> W(x / lambda).
  SmoothWindow dilate(double lambda) const;
  SmoothWindow scaled(double c) const;
  friend SmoothWindow operator+(const SmoothWindow& a, const SmoothWindow& b);

  // max over the support of |W^{(j)}| * width^j, on a uniform sample.
  double derivative_bound(int j, int samples = 4001) const;

 private:
  Interval support_;
  std::shared_ptr<const Evaluator> eval_;
  Normalization norm_;
  int j_max_;
  std::optional<Interval> plateau_;
  bool zero_ = false;
};

// Unit-mass bump on [1, 2].
SmoothWindow make_window_v();
// Support [1/2, 5/2], identically 1 on [1, 2].
SmoothWindow make_window_u();

// Ramp width parameter: the lowest window starts at lo * (1 - eta).
inline constexpr double kPartitionEta = 0.25;

// Windows in log2(y/lo), one per unit of log2(hi/lo), summing to 1 on [lo, hi].
std::vector<SmoothWindow> make_dyadic_partition(double lo, double hi);

}  // namespace weyl
