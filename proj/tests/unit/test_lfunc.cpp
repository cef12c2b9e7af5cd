#include <doctest.h>

#include <cmath>
#include <vector>

#include "weyl/error.hpp"
#include "weyl/forms.hpp"
#include "weyl/lfunc.hpp"

using namespace weyl;

namespace {

const CuspForm& delta20k() {
  static const CuspForm f = delta_form(20000);
  return f;
}

// eta(z)^2 eta(11 z)^2: weight 2, level 11, root number +1.
const CuspForm& level11() {
  static const CuspForm f = [] {
    const long n_max = 2000;
    std::vector<long long> c(static_cast<std::size_t>(n_max), 0);
    c[0] = 1;
    for (long step : {1L, 1L, 11L, 11L})
      for (long m = step; m < n_max; m += step)
        for (long j = n_max - 1; j >= m; --j) c[static_cast<std::size_t>(j)] -= c[static_cast<std::size_t>(j - m)];
    CuspForm g;
    g.kind = Holomorphic{2};
    g.level = 11;
    g.chi = trivial_character(11);
    g.epsilon_f = cplx(1.0);
    g.lambda.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
    for (long n = 1; n <= n_max; ++n)
      g.lambda[static_cast<std::size_t>(n)] = static_cast<double>(c[static_cast<std::size_t>(n - 1)]) / std::sqrt(double(n));
    return g;
  }();
  return f;
}

AfeConfig second_weight() {
  AfeConfig c;
  c.weight = cosine_gaussian_weight();
  return c;
}

}  // namespace

TEST_CASE("afe_value against the incomplete-gamma oracle") {
  // tests/oracles/afe_oracle.py, 40 digits.
  struct Row {
    double t, re, im;
  };
  for (const Row& r : {Row{0.0, 0.79212283864603056936, 0.0}, Row{5.0, 1.3666500058630803991, 0.13431473862699814621},
                       Row{10.0, 0.22874997077903386461, 0.81182180422428185101},
                       Row{30.0, 2.6979130896049925479, 0.25377606128035745689}}) {
    INFO("t = " << r.t);
    CHECK(std::abs(afe_value(delta20k(), r.t) - cplx(r.re, r.im)) <= 1e-10);
  }
  CHECK(std::abs(afe_value(level11(), 0.0) - 0.25384186085591068434) <= 1e-10);
  CHECK(std::abs(afe_value(level11(), 3.0) - cplx(1.2780723029389415379, 1.4949148094918636065)) <= 1e-10);
}

TEST_CASE("afe_value: reality, weight independence, conjugate symmetry") {
  CHECK(std::abs(afe_value(delta20k(), 0.0).imag()) <= 1e-8);
  for (double t : {0.0, 1.0, 5.0, 10.0}) {
    INFO("t = " << t);
    const AfeValue a = afe_evaluate(delta20k(), t);
    AfeConfig b = second_weight();
    b.n_afe = 2 * a.n_used;
    CHECK(std::abs(a.value - afe_value(delta20k(), t, b)) <= 1e-6);
    CHECK(std::abs(afe_value(level11(), t) - afe_value(level11(), t, second_weight())) <= 1e-6);
  }
  CHECK(std::abs(afe_value(delta20k(), -5.0) - std::conj(afe_value(delta20k(), 5.0))) <= 1e-8);
}

TEST_CASE("afe_value: truncation") {
  // n_afe at exactly 3 (1 + t) sqrt(M) and twice that.
  for (double t : {5.0, 20.0}) {
    AfeConfig a, b;
    a.n_afe = static_cast<long>(std::ceil(3.0 * (1.0 + t)));
    b.n_afe = 2 * a.n_afe;
    CHECK(std::abs(std::abs(afe_value(delta20k(), t, a)) - std::abs(afe_value(delta20k(), t, b))) <= 1e-6);
  }
  const AfeValue v = afe_evaluate(delta20k(), 5.0);
  CHECK(v.n_used >= 18);
  CHECK(v.tail_estimate < 1e-10);
  AfeConfig big;
  big.n_afe = 4 * v.n_used;
  CHECK(std::abs(afe_value(delta20k(), 5.0, big) - v.value) <= 1e-12);
}

TEST_CASE("afe_value: errors") {
  CuspForm no_eps = delta20k();
  no_eps.epsilon_f.reset();
  CHECK_THROWS_AS(afe_value(no_eps, 1.0), MissingRootNumber);
  CHECK_THROWS_AS(afe_value(delta_form(20), 10.0), RangeError);
  AfeConfig low;
  low.n_afe = 10;
  CHECK_THROWS_AS(afe_value(delta20k(), 5.0, low), PreconditionError);
  low.n_afe = 30000;
  CHECK_THROWS_AS(afe_value(delta20k(), 5.0, low), RangeError);
}

TEST_CASE("cutoff weight: both contours agree and V -> 1 at 0") {
  const AfeConfig cfg;
  // V(y) - 1 ~ y^room, room = distance from Re u = 0 to the first gamma pole.
  struct Case {
    GammaFactorKind kind;
    double room;
  };
  for (const Case& c : {Case{Holomorphic{12}, 6.0}, Case{Holomorphic{2}, 1.0}, Case{Maass{9.5, 0}, 0.5},
                        Case{Maass{cplx(0.0, 0.2), 1}, 1.3}}) {
    for (double t : {0.0, 10.0}) {
      INFO("room = " << c.room << ", t = " << t);
      const CutoffWeight V(c.kind, cplx(0.5, t), cfg);
      const double y = V.y_switch();
      CHECK(std::abs(V.right(y) - 1.0 - V.left(y)) <= 1e-9 * (1.0 + std::abs(V(y))));
      const double y1 = c.room > 3.0 ? 1e-2 : 1e-5;
      const double rate = std::log10(std::abs(V(y1) - 1.0) / std::abs(V(0.1 * y1) - 1.0));
      CHECK(std::abs(rate - c.room) <= 0.1);
      CHECK(std::abs(V(1e-6) - 1.0) <= 1e-2);
    }
  }
  // Maass gamma_inf against Gamma products directly.
  const cplx s(0.5, 7.0);
  const cplx g = std::exp(log_gamma_inf(Maass{9.5, 1}, s));
  const cplx d = std::pow(kPi, -s) * complex_gamma(0.5 * (s + 1.0 + kI * 9.5)) * complex_gamma(0.5 * (s + 1.0 - kI * 9.5));
  CHECK(std::abs(g - d) <= 1e-12 * std::abs(d));
}

TEST_CASE("tail_check") {
  const TailReport r = tail_check(delta20k(), 10.0);
  CHECK(r.v_abs[3] <= 1e-6 * r.v_abs[0]);
  CHECK(r.superpolynomial);
  CHECK(tail_check(delta20k(), 0.0).superpolynomial);
  CHECK(tail_check(delta20k(), 1.0).v_abs[3] <= 1e-6 * tail_check(delta20k(), 1.0).v_abs[0]);
}

// Measured at t = 0: |V(8)| / |V(1)| = 1.2e-5. The Gamma(s + 11/2) factor sets the scale near y = 1,
// so lambda (1 + |t|) = 8 is only eight transition widths out.
TEST_CASE("tail_check: lambda = 8 below 1e-6 of lambda = 1 at t = 0" * doctest::should_fail()) {
  const TailReport r = tail_check(delta20k(), 0.0);
  CHECK(r.v_abs[3] <= 1e-6 * r.v_abs[0]);
}

// Measured crossovers: 0.88 (t = 0), 2.95 (t = 10), 53.8 (t = 100). The ratio 3.4 for t = 0 -> 10 is set by
// |s + 11/2| rather than 1 + |t|.
TEST_CASE("tail_check: crossover proportional to 1 + |t|" * doctest::should_fail()) {
  const double q = tail_check(delta20k(), 10.0).crossover / tail_check(delta20k(), 0.0).crossover;
  CHECK(std::abs(q / 11.0 - 1.0) <= 0.5);
}

TEST_CASE("tail_check: crossover grows with t") {
  double last = 0.0;
  for (double t : {0.0, 10.0, 100.0}) {
    const double c = tail_check(delta20k(), t).crossover;
    CHECK(c > last);
    last = c;
  }
}

TEST_CASE("fit_growth") {
  std::vector<double> t, one;
  for (int i = 0; i < 50; ++i) {
    t.push_back(10.0 + i);
    one.push_back(1.0);
  }
  const GrowthFit g = fit_growth(t, one, 10);
  CHECK(std::abs(g.exponent) <= 1e-14);
  CHECK(g.window_t.size() == 10);
  std::vector<double> sq;
  for (double x : t) sq.push_back(std::sqrt(x));
  CHECK(std::abs(fit_growth(t, sq, 5).exponent - 0.5) <= 0.01);
  CHECK_THROWS_AS(fit_growth(t, one, 2), PreconditionError);
}

TEST_CASE("growth_scan") {
  // grid(2 n - 1) holds grid(n) plus every midpoint.
  auto grid = [](int n) {
    std::vector<double> t;
    for (int i = 0; i < n; ++i) t.push_back(10.0 + 490.0 * i / (n - 1));
    return t;
  };
  const GrowthReport a = growth_scan(delta20k(), grid(200));
  CHECK(a.records.size() == 200);
  CHECK(a.fit.exponent < 0.5);
  for (const ScanRecord& r : a.records) CHECK_FALSE(r.flagged);
  CHECK(a.disclaimer.find("not certified") != std::string::npos);
  const GrowthReport b = growth_scan(delta20k(), grid(399));
  CHECK(std::abs(a.fit.exponent - b.fit.exponent) <= 0.05);

  const std::vector<double> few = {10.0, 20.0, 40.0, 80.0, 160.0, 320.0};
  const GrowthReport s = growth_scan(delta20k(), few, {}, 3, Exec::Serial), p = growth_scan(delta20k(), few, {}, 3);
  for (std::size_t i = 0; i < few.size(); ++i) CHECK(s.records[i].L_abs == p.records[i].L_abs);
  const std::vector<double> bad = {5.0, 20.0, 30.0};
  CHECK_THROWS_AS(growth_scan(delta20k(), bad), PreconditionError);
}
