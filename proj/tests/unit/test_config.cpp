#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "weyl/config.hpp"
#include "weyl/error.hpp"
#include "weyl/suites.hpp"

using namespace weyl;

namespace {

std::string write_temp(const std::string& name, const std::string& text) {
  const std::string path = std::string(P_tmpdir) + "/" + name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST_CASE("config: defaults cover every key") {
  const Config c = Config::defaults();
  CHECK(c.entries().size() == Config::keys().size());
  CHECK(c.integer("seed") == 20261018);
  CHECK(c.real("voronoi.tolerance") == doctest::Approx(1e-6));
  CHECK_THROWS_AS(c.integer("voronoi.tolerance"), PreconditionError);
  CHECK_THROWS_AS(c.real("nope"), PreconditionError);
}

TEST_CASE("config: load overrides and reports the offending line") {
  const Config c = Config::load(write_temp("weyl_ok.conf", "# comment\n\nseed = 7\n  afe.abscissa=2.5  \n"));
  CHECK(c.integer("seed") == 7);
  CHECK(c.real("afe.abscissa") == 2.5);
  CHECK(c.real("afe.damping") == 1e-20);

  auto line_of = [](const std::string& path) {
    try {
      Config::load(path);
    } catch (const ParseError& e) {
      CHECK(e.path == path);
      return e.line;
    }
    return -1L;
  };
  CHECK(line_of(write_temp("weyl_eq.conf", "seed = 1\nseed 2\n")) == 2);
  CHECK(line_of(write_temp("weyl_key.conf", "\nbogus = 1\n")) == 2);
  CHECK(line_of(write_temp("weyl_int.conf", "seed = 1.5\n")) == 1);
  CHECK(line_of(write_temp("weyl_real.conf", "afe.abscissa = x\n")) == 1);
  CHECK(line_of("/nonexistent/weyl.conf") == 0);
}

TEST_CASE("config: set validates") {
  Config c = Config::defaults();
  c.set("budget.cells", "500");
  CHECK(c.integer("budget.cells") == 500);
  CHECK_THROWS_AS(c.set("budget.cells", "5e2"), PreconditionError);
  CHECK_THROWS_AS(c.set("nope", "1"), PreconditionError);
}

TEST_CASE("suites: names map to criteria") {
  CHECK(suite_criteria("all").size() == static_cast<std::size_t>(kCriteria));
  CHECK(suite_criteria("pipeline") == std::vector<int>{6, 7});
  for (const auto& s : suite_names()) CHECK_FALSE(suite_criteria(s).empty());
  CHECK_THROWS_AS(suite_criteria("nope"), PreconditionError);
  CHECK_THROWS_AS(run_criterion(11, Config::defaults()), PreconditionError);
}

TEST_CASE("suites: status folds checks") {
  CriterionResult r;
  r.checks.resize(2);
  r.checks[0].status = r.checks[1].status = CheckStatus::Pass;
  CHECK(r.status() == CheckStatus::Pass);
  r.checks[1].status = CheckStatus::ExpectedFail;
  CHECK(r.status() == CheckStatus::ExpectedFail);
  r.checks[0].status = CheckStatus::Fail;
  CHECK(r.status() == CheckStatus::Fail);
}

TEST_CASE("suites: cheap criteria pass and serial matches parallel") {
  const Config cfg = Config::defaults();
  for (int id : {2, 3, 5, 9}) {
    const CriterionResult p = run_criterion(id, cfg, Exec::Parallel), s = run_criterion(id, cfg, Exec::Serial);
    CHECK(p.status() == CheckStatus::Pass);
    REQUIRE(p.checks.size() == s.checks.size());
    for (std::size_t i = 0; i < p.checks.size(); ++i) CHECK(p.checks[i].residual == s.checks[i].residual);
  }
}

TEST_CASE("suites: calibration constants carry provenance") {
  const auto c = calibration_constants();
  REQUIRE(c.size() == 3);
  for (const auto& x : c) {
    CHECK(x.value > 0.0);
    CHECK_FALSE(x.provenance.empty());
  }
}
