// weyl-delta: acceptance suites, growth scan, coefficient files and calibration.
//
// Exit codes: 0 pass, 1 a check failed, 2 usage, 3 unreadable or malformed input,
// 4 quadrature budget exhausted, 5 only documented expected failures.

#include <CLI11.hpp>
#include <clocale>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>

#include "weyl/error.hpp"
#include "weyl/forms.hpp"
#include "weyl/oscillate.hpp"
#include "weyl/statphase.hpp"
#include "weyl/suites.hpp"
#include "weyl/testfn.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace weyl;

enum Exit { kPass = 0, kFail = 1, kUsage = 2, kInput = 3, kBudget = 4, kExpected = 5 };

struct Common {
  std::string config = "default";
  std::optional<long> seed;
  std::optional<long> budget;
  bool deterministic = false;
  bool serial = false;
};

Config load_config(const Common& o) {
  Config cfg = o.config == "default" ? Config::defaults() : Config::load(o.config);
  if (o.seed) cfg.set("seed", std::to_string(*o.seed));
  // config < WEYL_DELTA_BUDGET < --budget
  if (const char* env = std::getenv("WEYL_DELTA_BUDGET")) {
    try {
      cfg.set("budget.cells", env);
    } catch (const PreconditionError& e) {
      throw ParseError("WEYL_DELTA_BUDGET", 0, e.what());
    }
  }
  if (o.budget) cfg.set("budget.cells", std::to_string(*o.budget));
  if (cfg.integer("budget.cells") <= 0) throw PreconditionError("budget.cells must be positive");
  set_default_cell_budget(static_cast<std::size_t>(cfg.integer("budget.cells")));
  return cfg;
}

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json to_json(const CriterionResult& r, bool deterministic) {
  json checks = json::array();
  for (const Check& c : r.checks) {
    const bool timing = c.anchor == "runtime budget";
    json values = json::object();
    for (const auto& [k, v] : c.values) values[k] = deterministic && timing ? json(0.0) : number(v);
    json j = {{"name", c.name},
              {"anchor", c.anchor},
              {"status", to_string(c.status)},
              {"residual", deterministic && timing ? json(0.0) : number(c.residual)},
              {"tolerance", number(c.tolerance)},
              {"values", values},
              {"runtime_s", deterministic ? 0.0 : c.runtime_s}};
    if (!c.note.empty()) j["note"] = c.note;
    checks.push_back(j);
  }
  json rows = json::array();
  for (const auto& row : r.points.rows) {
    json x = json::array();
    for (double v : row) x.push_back(number(v));
    rows.push_back(x);
  }
  json out = {{"id", r.id},
              {"title", r.title},
              {"status", to_string(r.status())},
              {"runtime_s", deterministic ? 0.0 : r.runtime_s},
              {"checks", checks},
              {"points", {{"name", r.points.name}, {"columns", r.points.columns}, {"rows", rows}}}};
  if (!r.disclaimer.empty()) out["disclaimer"] = r.disclaimer;
  return out;
}

void write_checks_csv(const std::string& path, const std::vector<CriterionResult>& results, bool deterministic) {
  std::ofstream f(path);
  if (!f) throw ParseError(path, 0, "cannot open for writing");
  f << "criterion,check,status,residual,tolerance,runtime_s\n";
  char buf[64];
  auto num = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };
  for (const auto& r : results) {
    for (const Check& c : r.checks) {
      const bool timing = c.anchor == "runtime budget";
      f << r.id << ",\"" << c.name << "\"," << to_string(c.status) << ','
        << num(deterministic && timing ? 0.0 : c.residual) << ',' << num(c.tolerance) << ','
        << num(deterministic ? 0.0 : c.runtime_s) << '\n';
    }
  }
}

int exit_for(const std::vector<CriterionResult>& results) {
  bool expected = false;
  for (const auto& r : results) {
    if (r.status() == CheckStatus::Fail) return kFail;
    expected = expected || r.status() == CheckStatus::ExpectedFail;
  }
  return expected ? kExpected : kPass;
}

void emit(const json& j, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(out_path);
  if (!f) throw ParseError(out_path, 0, "cannot open for writing");
  f << j.dump(2) << '\n';
}

int run_verify(const Common& o, const std::string& suite, const std::string& form_arg, const std::string& out,
               const std::string& csv) {
  const Config cfg = load_config(o);
  std::optional<CuspForm> form;
  if (form_arg != "delta") form = load_form(form_arg);
  const std::vector<int> ids = suite_criteria(suite);
  const Exec exec = o.serial ? Exec::Serial : Exec::Parallel;

  std::vector<CriterionResult> results;
  json crit = json::array();
  for (int id : ids) {
    results.push_back(run_criterion(id, cfg, exec, form ? &*form : nullptr));
    crit.push_back(to_json(results.back(), o.deterministic));
  }
  json cal = json::array();
  for (const Calibration& c : calibration_constants())
    cal.push_back({{"name", c.name}, {"value", c.value}, {"provenance", c.provenance}});
  json conf = json::object();
  for (const auto& [k, v] : cfg.entries()) conf[k] = v;
  const int code = exit_for(results);
  const json j = {{"suite", suite},
                  {"form", form_arg},
                  {"config", conf},
                  {"status", code == kPass ? "pass" : code == kExpected ? "expected_fail" : "fail"},
                  {"criteria", crit},
                  {"calibration", cal}};
  emit(j, out);
  if (!csv.empty()) write_checks_csv(csv, results, o.deterministic);
  return code;
}

int run_scan(const Common& o, double t_min, double t_max, long samples, const std::string& out,
             const std::string& csv) {
  Config cfg = load_config(o);
  cfg.set("scan.t_min", std::to_string(t_min));
  cfg.set("scan.t_max", std::to_string(t_max));
  cfg.set("scan.samples", std::to_string(samples));
  const CriterionResult r = run_criterion(10, cfg, o.serial ? Exec::Serial : Exec::Parallel);
  if (!csv.empty()) {
    std::ofstream f(csv);
    if (!f) throw ParseError(csv, 0, "cannot open for writing");
    f << "t,L_abs\n";
    char buf[80];
    for (const auto& row : r.points.rows) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", row[0], row[1]);
      f << buf;
    }
  }
  emit(to_json(r, o.deterministic), out);
  return exit_for({r});
}

int run_export(const Common& o, long n_max, const std::string& out) {
  load_config(o);
  export_form(delta_form(n_max, o.serial ? Exec::Serial : Exec::Parallel), out);
  std::cout << json({{"wrote", out}, {"n_max", n_max}}).dump(2) << '\n';
  return kPass;
}

int run_import(const std::string& in) {
  const CuspForm f = load_form(in);
  const HeckeReport h = hecke_verify(f, f.n_max());
  json eps = nullptr;
  if (f.epsilon_f) eps = {f.epsilon_f->real(), f.epsilon_f->imag()};
  std::cout << json({{"path", in},
                     {"kind", f.is_maass() ? "maass" : "holomorphic"},
                     {"level", f.level},
                     {"n_max", f.n_max()},
                     {"epsilon", eps},
                     {"hecke_relations", h.checks},
                     {"hecke_max_violation", h.max_violation}})
                   .dump(2)
            << '\n';
  return kPass;
}

int run_calibrate(const Common& o, const std::string& out) {
  load_config(o);
  const FourierMellinCalibration c = calibrate_fourier_mellin(make_window_v(), 1.0);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "# Fourier-Mellin error constants for the window V on [1,2], sigma = 1.\n"
                "fm.stationary = %.6e\nfm.no_stationary = %.6e\n",
                c.stationary, c.no_stationary);
  if (out.empty() || out == "-") {
    std::cout << buf;
  } else {
    std::ofstream f(out);
    if (!f) throw ParseError(out, 0, "cannot open for writing");
    f << buf;
  }
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  std::setlocale(LC_ALL, "C");
  CLI::App app{"weyl-delta: numerical checks for the delta-method pipeline"};
  app.require_subcommand(1);
  app.fallthrough();
  Common o;
  app.add_option("--config", o.config, "default, or a key = value file")->capture_default_str();
  app.add_option("--seed", o.seed, "seed for randomized checks");
  app.add_option("--budget", o.budget, "oscillatory quadrature cell ceiling");
  app.add_flag("--deterministic", o.deterministic, "zero every timing in the output");
  app.add_flag("--serial", o.serial, "use the serial reference kernels");

  std::string suite, form = "delta", out, csv;
  auto* verify = app.add_subcommand("verify", "run an acceptance suite");
  verify->add_option("suite", suite, "voronoi, delta, statphase, pipeline, afe, forms, scan or all")
      ->required()
      ->check(CLI::IsMember(suite_names()));
  verify->add_option("--form", form, "delta, or a coefficient file (used by afe and forms)")->capture_default_str();
  verify->add_option("--out", out, "JSON report path; stdout by default");
  verify->add_option("--csv", csv, "per-check CSV path");

  double t_min = 10.0, t_max = 500.0;
  long samples = 200;
  auto* scan = app.add_subcommand("scan", "|L(1/2 + it)| on an even grid and the fitted growth exponent");
  scan->add_option("--t-min", t_min)->capture_default_str();
  scan->add_option("--t-max", t_max)->capture_default_str();
  scan->add_option("--samples", samples)->capture_default_str();
  scan->add_option("--out", out, "JSON report path; stdout by default");
  scan->add_option("--csv", csv, "t,|L| CSV path");

  long n_max = 10000;
  std::string path;
  auto* exp = app.add_subcommand("export-form", "write Delta's coefficients");
  exp->add_option("--n-max", n_max)->capture_default_str();
  exp->add_option("--out", path)->required();

  auto* imp = app.add_subcommand("import-form", "validate a coefficient file and summarize it");
  imp->add_option("--in", path)->required();

  auto* cal = app.add_subcommand("calibrate", "measure the Fourier-Mellin error constants");
  cal->add_option("--out", out, "output path; stdout by default");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  try {
    if (*verify) return run_verify(o, suite, form, out, csv);
    if (*scan) return run_scan(o, t_min, t_max, samples, out, csv);
    if (*exp) return run_export(o, n_max, path);
    if (*imp) return run_import(path);
    if (*cal) return run_calibrate(o, out);
  } catch (const ParseError& e) {
    std::cerr << "weyl-delta: " << e.what() << '\n';
    return kInput;
  } catch (const BudgetExceeded& e) {
    std::cerr << "weyl-delta: budget exhausted: " << e.what() << '\n';
    return kBudget;
  } catch (const HeckeViolation& e) {
    std::cerr << "weyl-delta: " << e.what() << '\n';
    return kFail;
  } catch (const PreconditionError& e) {
    std::cerr << "weyl-delta: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "weyl-delta: " << e.what() << '\n';
    return kFail;
  }
  return kUsage;
}
