#include <doctest.h>

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "weyl/arith.hpp"
#include "weyl/error.hpp"
#include "weyl/forms.hpp"

#ifndef WEYL_FIXTURE_DIR
#define WEYL_FIXTURE_DIR "tests/fixtures"
#endif

using namespace weyl;
namespace fs = std::filesystem;

namespace {

const CuspForm& delta10k() {
  static const CuspForm f = delta_form(10000);
  return f;
}

// prod (1 - q^n)^24 via Euler's pentagonal series, in arbitrary precision.
std::vector<boost::multiprecision::cpp_int> tau_oracle(int n_max) {
  using boost::multiprecision::cpp_int;
  const int N = n_max - 1;
  std::vector<std::pair<int, int>> pent{{0, 1}};
  for (int k = 1;; ++k) {
    const int a = k * (3 * k - 1) / 2, b = k * (3 * k + 1) / 2;
    if (a > N) break;
    pent.emplace_back(a, k % 2 ? -1 : 1);
    if (b <= N) pent.emplace_back(b, k % 2 ? -1 : 1);
  }
  std::vector<cpp_int> d(N + 1, 0), nd(N + 1);
  d[0] = 1;
  for (int r = 0; r < 24; ++r) {
    for (int i = 0; i <= N; ++i) {
      cpp_int acc = 0;
      for (const auto& [e, c] : pent)
        if (e <= i) acc += c * d[i - e];
      nd[i] = acc;
    }
    d.swap(nd);
  }
  std::vector<cpp_int> tau(n_max + 1, 0);
  for (int n = 1; n <= n_max; ++n) tau[n] = d[n - 1];
  return tau;
}

struct TempFile {
  fs::path path;
  explicit TempFile(const std::string& tag) {
    static int counter = 0;
    path = fs::temp_directory_path() / ("weyl_forms_" + tag + "_" + std::to_string(++counter) + ".coef");
  }
  ~TempFile() {
    std::error_code ec;
    fs::remove(path, ec);
  }
  std::string str() const { return path.string(); }
};

std::string slurp(const std::string& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& p, const std::string& s) { std::ofstream(p) << s; }

CuspForm with_lambda(std::vector<cplx> lam) {
  CuspForm f;
  f.lambda = std::move(lam);
  return f;
}

}  // namespace

TEST_CASE("delta_form: small coefficients") {
  const CuspForm& f = delta10k();
  CHECK(f.n_max() == 10000);
  CHECK(f.lam(1) == cplx(1.0));
  const auto tau = ramanujan_tau(12);
  CHECK(to_string(tau[2]) == "-24");
  CHECK(to_string(tau[3]) == "252");
  CHECK(to_string(tau[10]) == "-115920");
  CHECK(std::abs(f.lam(2) - (-24.0 / std::pow(2.0, 5.5))) < 1e-16);
  CHECK(std::abs(f.lam(6) - f.lam(2) * f.lam(3)) < 1e-15);
  CHECK(std::abs(f.lam(4) - (f.lam(2) * f.lam(2) - 1.0)) < 1e-15);
  CHECK_THROWS_AS(f.lam(10001), RangeError);
  CHECK_THROWS_AS(f.lam(0), RangeError);
  CHECK_THROWS_AS(delta_form(0), PreconditionError);
  CHECK_THROWS_AS(delta_form(1000001), PreconditionError);
}

TEST_CASE("ramanujan_tau: exact against the pentagonal product") {
  const int n = 600;
  const auto ref = tau_oracle(n);
  const auto tau = ramanujan_tau(n, Exec::Serial);
  int bad = 0;
  for (int m = 1; m <= n; ++m)
    if (to_string(tau[m]) != ref[m].str()) ++bad;
  CHECK(bad == 0);
  // Frozen from the same pentagonal construction carried to 10^4 in exact integers.
  const auto big = ramanujan_tau(10000);
  CHECK(to_string(big[97]) == "75013568546");
  CHECK(to_string(big[1000]) == "-30328412970240000");
  CHECK(to_string(big[5000]) == "-41301931521259200000");
  CHECK(to_string(big[9973]) == "-808737643658836893778");
  CHECK(to_string(big[10000]) == "-482606811957501440000");
}

TEST_CASE("ramanujan_tau: serial and parallel agree") {
  const auto a = ramanujan_tau(20000, Exec::Serial);
  const auto b = ramanujan_tau(20000, Exec::Parallel);
  CHECK(a == b);
}

TEST_CASE("hecke_verify: delta to 10^4") {
  const HeckeReport r = hecke_verify(delta10k(), 10000);
  CHECK_FALSE(r.violated);
  CHECK(r.max_violation <= 1e-12);
  CHECK(r.checks > 10000);
}

TEST_CASE("hecke_verify: multiplicative but wrong at prime powers") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const long n_max = 500;
  const auto spf = smallest_prime_factors(n_max);
  std::vector<cplx> lam(n_max + 1, 0.0);
  lam[1] = 1.0;
  for (long n = 2; n <= n_max; ++n) {
    const auto fac = factorize(n, spf);
    if (fac.size() == 1) {
      lam[n] = u(rng);
    } else {
      long q = 1;
      for (int i = 0; i < fac[0].second; ++i) q *= fac[0].first;
      lam[n] = lam[q] * lam[n / q];
    }
  }
  const HeckeReport r = hecke_verify(with_lambda(lam), n_max);
  REQUIRE(r.violated);
  CHECK(r.n == 4);
  CHECK(r.m1 == 2);
  CHECK(r.m2 == 2);
}

TEST_CASE("delta_form: Deligne band at primes") {
  const CuspForm& f = delta10k();
  double worst = 0.0;
  for (long p : primes_in(2, 10000)) worst = std::max(worst, std::abs(f.lam(p)));
  CHECK(worst <= 2.0);
}

TEST_CASE("rankin_average") {
  const std::vector<double> xs{1e2, 1e3, 1e4};
  const RankinReport r = rankin_average(delta10k(), xs);
  for (double a : r.avg) {
    CHECK(a >= 0.2);
    CHECK(a <= 5.0);
  }
  CHECK(std::abs(r.slope - 1.0) <= 0.15);
  const RankinReport one = rankin_average(with_lambda(std::vector<cplx>(101, 1.0)), std::vector<double>{10, 50, 100});
  for (double a : one.avg) CHECK(a == 1.0);
  CHECK(std::abs(one.slope - 1.0) < 1e-14);
  CHECK_THROWS_AS(rankin_average(delta10k(), std::vector<double>{2e4}), PreconditionError);
}

TEST_CASE("characters") {
  CHECK_NOTHROW(validate_character(12, trivial_character(12)));
  for (int a = 0; a < 12; ++a) CHECK((trivial_character(12)[a] == 0.0) == (std::gcd(a, 12) > 1));
  // chi mod 5 with chi(2) = i
  const std::vector<cplx> chi5{0.0, 1.0, kI, -kI, -1.0};
  CHECK_NOTHROW(validate_character(5, chi5));
  std::vector<cplx> bad = chi5;
  bad[4] = 1.0;
  CHECK_THROWS_AS(validate_character(5, bad), PreconditionError);
  CHECK_THROWS_AS(validate_character(4, chi5), PreconditionError);
  std::vector<cplx> nonunit = trivial_character(6);
  nonunit[2] = 1.0;
  CHECK_THROWS_AS(validate_character(6, nonunit), PreconditionError);
}

TEST_CASE("coefficient files: delta round trip") {
  TempFile t("delta");
  export_form(delta10k(), t.str());
  const std::string text = slurp(t.str());
  CHECK(text.rfind("#kind holomorphic\n#k 12\n#M 1\n", 0) == 0);
  const CuspForm g = load_form(t.str());
  CHECK(g == delta10k());
  bool bitwise = true;
  for (long n = 1; n <= g.n_max(); ++n) bitwise = bitwise && g.lam(n) == delta10k().lam(n);
  CHECK(bitwise);
}

TEST_CASE("coefficient files: Maass fixture") {
  const CuspForm m = load_form(std::string(WEYL_FIXTURE_DIR) + "/maass_synthetic.coef");
  CHECK(m.is_maass());
  CHECK(std::get<Maass>(m.kind).delta == 0);
  CHECK(m.epsilon_g == 1);
  CHECK(m.n_max() == 2000);
  CHECK_FALSE(m.epsilon_f.has_value());
  TempFile t("maass");
  export_form(m, t.str());
  CHECK(load_form(t.str()) == m);
}

TEST_CASE("coefficient files: rejections") {
  const CuspForm small = delta_form(50);
  TempFile t("bad");
  export_form(small, t.str());
  const std::string good = slurp(t.str());

  SUBCASE("Hecke violation names n = 6") {
    std::string s = good;
    const auto pos = s.find("\n6 ");
    REQUIRE(pos != std::string::npos);
    const auto end = s.find('\n', pos + 1);
    s.replace(pos + 1, end - pos - 1, "6 0.125");
    spit(t.str(), s);
    try {
      load_form(t.str());
      FAIL("expected HeckeViolation");
    } catch (const HeckeViolation& e) {
      CHECK(e.n == 6);
    }
  }
  SUBCASE("chi length differs from M") {
    std::string s = good;
    s.replace(s.find("#M 1"), 4, "#M 3");
    spit(t.str(), s);
    CHECK_THROWS_AS(load_form(t.str()), ParseError);
  }
  SUBCASE("malformed line reports its number") {
    std::string s = good;
    s.replace(s.find("\n3 "), 3, "\n3 x");
    spit(t.str(), s);
    try {
      load_form(t.str());
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line == 11);
    }
  }
  SUBCASE("index out of sequence") {
    std::string s = good;
    s.replace(s.find("\n3 "), 3, "\n4 ");
    spit(t.str(), s);
    CHECK_THROWS_AS(load_form(t.str()), ParseError);
  }
  SUBCASE("missing file names the path") {
    const std::string p = t.str() + ".missing";
    try {
      load_form(p);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.path == p);
      CHECK(std::string(e.what()).find(p) != std::string::npos);
    }
  }
}
