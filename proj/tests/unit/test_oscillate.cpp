#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles/hp.hpp"
#include "weyl/error.hpp"
#include "weyl/oscillate.hpp"
#include "weyl/testfn.hpp"

using namespace weyl;

namespace {

const SmoothWindow& V() {
  static const SmoothWindow v = make_window_v();
  return v;
}

PhaseProfile linear_profile(double B, double quad = 0.0) {
  PhaseProfile p;
  p.f = [B, quad](double x, int k) -> double {
    switch (k) {
      case 0: return B * x + quad * x * x;
      case 1: return B + 2 * quad * x;
      case 2: return 2 * quad;
      default: return 0.0;
    }
  };
  p.g = [](double x, int k) { return V().derivative(x, k); };
  p.a = 1.0;
  p.b = 2.0;
  p.theta_f = B;
  p.omega_f = 1.0;
  p.omega_g = 1.0;
  p.lambda = B;
  return p;
}

}  // namespace

TEST_CASE("integrate_1d: trivial reductions") {
  auto r = integrate_1d([](double x) { return V()(x); }, [](double) { return 0.0; }, 1.0, 2.0, 1e-14);
  CHECK(std::abs(r.value - 1.0) < 1e-13);
  CHECK(r.cells >= 16);
  for (int m : {1, 7, 40}) {
    auto z = integrate_1d([](double) { return 1.0; }, [m](double x) { return m * x; }, 0.0, 1.0, 1e-14);
    CHECK(std::abs(z.value) < 1e-13);
  }
}

TEST_CASE("integrate_1d: Fresnel oracle") {
  const cplx ref = oracle::to_double(oracle::fresnel(oracle::hp_real(2)) / oracle::hp_cplx(2));
  auto r = integrate_1d([](double) { return 1.0; }, [](double x) { return x * x; }, 0.0, 1.0, 1e-14);
  CHECK(std::abs(r.value - ref) < 1e-13);
  CHECK(r.abs_error_estimate <= 1e-13);
}

TEST_CASE("integrate_1d: refinement, linearity, conjugation") {
  auto g1 = [](double x) { return V()(x); };
  auto g2 = [](double x) { return std::cos(x) * V()(x); };
  auto f = [](double x) { return 37.3 * x + 3.0 * std::log(x); };
  const auto coarse = integrate_1d(g1, f, 1.0, 2.0, 1e-8);
  const auto fine = integrate_1d(g1, f, 1.0, 2.0, 5e-9);
  CHECK(std::abs(coarse.value - fine.value) <= coarse.abs_error_estimate + 1e-15);
  const auto a = integrate_1d(g1, f, 1.0, 2.0, 1e-13);
  const auto b = integrate_1d(g2, f, 1.0, 2.0, 1e-13);
  const auto ab = integrate_1d([&](double x) { return 2.0 * g1(x) - 3.0 * g2(x); }, f, 1.0, 2.0, 1e-13);
  CHECK(std::abs(ab.value - (2.0 * a.value - 3.0 * b.value)) < 1e-12);
  const auto c = integrate_1d(g1, [&](double x) { return -f(x); }, 1.0, 2.0, 1e-13);
  CHECK(std::abs(c.value - std::conj(a.value)) < 1e-13);
}

TEST_CASE("integrate_1d: serial and parallel agree bitwise") {
  auto g = [](double x) { return V()(x); };
  auto f = [](double x) { return 300.0 * x * x; };
  QuadratureOptions s{kDefaultCellBudget, Exec::Serial}, p{kDefaultCellBudget, Exec::Parallel};
  const auto a = integrate_1d(g, f, 1.0, 2.0, 1e-12, s);
  const auto b = integrate_1d(g, f, 1.0, 2.0, 1e-12, p);
  CHECK(a.value == b.value);
  CHECK(a.cells == b.cells);
}

TEST_CASE("integrate_1d: budget") {
  QuadratureOptions tiny{8, Exec::Serial};
  auto r = integrate_1d([](double) { return 1.0; }, [](double x) { return 1e3 * x * x; }, 0.0, 1.0, 1e-14, tiny);
  CHECK(r.budget_exceeded);
  CHECK(r.cells <= 8);
  CHECK_THROWS_AS(require_within_budget(r), BudgetExceeded);
}

TEST_CASE("decay_probe: integration by parts law") {
  const std::vector<double> Bs = {16, 32, 64, 128};
  const auto r2 = decay_probe([](double B) { return linear_profile(B); }, Bs, 2);
  CHECK(r2.bound_slope <= -1.8);
  CHECK(r2.realized);
  CHECK(r2.bound_holds);
  CHECK(r2.actual_slope <= -1.8);
  const auto rq = decay_probe([](double B) { return linear_profile(B, 0.01); }, Bs, 2);
  CHECK(rq.bound_slope <= -1.8);
  CHECK(rq.bound_holds);
  const auto r0 = decay_probe([](double B) { return linear_profile(B); }, Bs, 0);
  CHECK(std::abs(r0.bound_slope) < 0.05);
  for (int j : {1, 2, 3}) {
    const auto r = decay_probe([](double B) { return linear_profile(B, 0.01); }, Bs, j);
    CHECK(std::abs(r.bound_slope + j) <= 0.2);
    CHECK(r.bound_holds);
  }
  // f' = B - 2x dips below B on [1, 2]
  CHECK_THROWS_AS(decay_probe([](double B) { return linear_profile(B, -1.0); }, Bs, 1), PreconditionError);
}

TEST_CASE("phase profile scale constant") {
  const auto p = linear_profile(50.0, 0.01);
  const double c = sampled_scale_constant(p);
  CHECK(c >= 1.0);
  CHECK(std::isfinite(c));
  CHECK(sampled_min_fprime(p) >= 50.0);
}

namespace {

double b1(double x) { return bump((x - 0.5) / 0.4); }
double b1p(double x) { return bump_derivative((x - 0.5) / 0.4, 1) / 0.4; }

}  // namespace

TEST_CASE("integrate_2d: quadratic phase and double exponential bound") {
  const Rect R{-0.5, 0.5, -0.5, 0.5};
  auto g = [](double x, double y) { return b1(x + 0.5) * b1(y + 0.5); };
  auto gxy = [](double x, double y) { return b1p(x + 0.5) * b1p(y + 0.5); };
  const double var = total_variation(gxy, R);
  double lo = 1e300, hi = 0.0;
  for (double r1 : {4.0, 8.0, 16.0})
    for (double r2 : {4.0, 8.0, 16.0}) {
      auto f = [=](double x, double y) { return r1 * r1 * x * x / 2 + r2 * r2 * y * y / 2; };
      const double c = condition_constant([=](double, double) { return r1 * r1; },
                                          [=](double, double) { return r2 * r2; }, [](double, double) { return 0.0; },
                                          R, r1, r2);
      CHECK(c >= 1.0);
      const auto I = integrate_2d(g, f, R, 1e-8);
      CHECK_FALSE(I.budget_exceeded);
      const double ratio = std::abs(I.value) * r1 * r2 / var;
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
  CHECK(hi < 1.0);
  CHECK(hi / lo < 4.0);
}

TEST_CASE("integrate_2d: zero and separable integrands") {
  const Rect R{0.0, 1.0, 0.0, 1.0};
  auto z = integrate_2d([](double, double) { return 0.0; }, [](double x, double y) { return x * y; }, R, 1e-12);
  CHECK(std::abs(z.value) == 0.0);
  auto gx = [](double x) { return b1(x); };
  auto fx = [](double x) { return 5.0 * x * x; };
  auto fy = [](double y) { return 3.0 * y; };
  const auto ix = integrate_1d(gx, fx, 0.0, 1.0, 1e-13);
  const auto iy = integrate_1d(gx, fy, 0.0, 1.0, 1e-13);
  const auto i2 = integrate_2d([&](double x, double y) { return gx(x) * gx(y); },
                               [&](double x, double y) { return fx(x) + fy(y); }, R, 1e-11);
  CHECK(std::abs(i2.value - ix.value * iy.value) < 1e-10);
}
