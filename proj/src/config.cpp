#include "weyl/config.hpp"

#include <charconv>
#include <fstream>

#include "weyl/error.hpp"

namespace weyl {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Empty string when the value parses as the key's type.
std::string check_value(Config::Type type, const std::string& v) {
  const char* end = v.data() + v.size();
  if (type == Config::Type::Integer) {
    long x = 0;
    const auto r = std::from_chars(v.data(), end, x);
    if (r.ec != std::errc() || r.ptr != end) return "expected an integer, got '" + v + "'";
  } else {
    double x = 0.0;
    const auto r = std::from_chars(v.data(), end, x);
    if (r.ec != std::errc() || r.ptr != end) return "expected a number, got '" + v + "'";
  }
  return {};
}

const Config::Key* find_key(const std::string& name) {
  for (const auto& k : Config::keys())
    if (k.name == name) return &k;
  return nullptr;
}

}  // namespace

const std::vector<Config::Key>& Config::keys() {
  using T = Config::Type;
  static const std::vector<Key> k = {
      {"seed", T::Integer, "20261018", "RNG seed for randomized checks"},
      {"budget.cells", T::Integer, "1000000", "oscillatory quadrature cell ceiling (WEYL_DELTA_BUDGET overrides)"},
      {"voronoi.rhs_tol", T::Real, "1e-13", "|W-hat| level where the dual sum is cut"},
      {"voronoi.tail_tol", T::Real, "1e-14", "contour cut, relative to the peak of |W~ Gamma|"},
      {"voronoi.mellin_nodes", T::Integer, "2048", "nodes for the x-Mellin table"},
      {"voronoi.tolerance", T::Real, "1e-6", "relative residual bound per matrix cell"},
      {"delta.q", T::Integer, "13", "modulus for the trivial delta checks"},
      {"delta.X", T::Real, "10", "scale X for the trivial delta checks"},
      {"delta.pairs", T::Integer, "1000", "random (r, n) pairs for the averaged delta identity"},
      {"pipeline.N", T::Real, "50", "S(N) decomposition: N"},
      {"pipeline.t", T::Real, "10", "S(N) decomposition: t"},
      {"pipeline.K", T::Real, "5", "S(N) decomposition: K"},
      {"pipeline.P", T::Real, "60", "S(N) decomposition: primes in [P, 2P]"},
      {"dual.N", T::Real, "20", "dual identity: N"},
      {"dual.t", T::Real, "5", "dual identity: t"},
      {"dual.K", T::Real, "3", "dual identity: K"},
      {"dual.p", T::Integer, "11", "dual identity: the prime, used as c"},
      {"dual.trunc_tol", T::Real, "1e-15", "envelope level for the n and r cutoffs"},
      {"dual.n_max", T::Integer, "1000000", "coefficients of Delta available to the dual sum"},
      {"afe.weight_scale", T::Real, "4", "G(u) = exp((u/scale)^2)"},
      {"afe.abscissa", T::Real, "3", "Re u of the right contour"},
      {"afe.damping", T::Real, "1e-20", "contour truncation level"},
      {"afe.tail_tol", T::Real, "1e-13", "cutoff-weight level that fixes n_afe"},
      {"forms.n_max", T::Integer, "10000", "Hecke and Rankin checks run to this n"},
      {"scan.t_min", T::Real, "10", "growth scan: first t"},
      {"scan.t_max", T::Real, "500", "growth scan: last t"},
      {"scan.samples", T::Integer, "200", "growth scan: evenly spaced samples"},
      {"scan.windows", T::Integer, "10", "growth scan: equal-count windows for the maxima fit"},
  };
  return k;
}

Config Config::defaults() {
  Config c;
  for (const auto& k : keys()) c.values_[k.name] = k.fallback;
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open configuration file");
  Config c = defaults();
  std::string line;
  long no = 0;
  while (std::getline(in, line)) {
    ++no;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError(path, no, "expected key = value");
    const std::string key = trim(s.substr(0, eq)), value = trim(s.substr(eq + 1));
    const Key* k = find_key(key);
    if (!k) throw ParseError(path, no, "unknown key '" + key + "'");
    if (const std::string e = check_value(k->type, value); !e.empty()) throw ParseError(path, no, key + ": " + e);
    c.values_[key] = value;
  }
  return c;
}

void Config::set(const std::string& key, const std::string& value) {
  const Key* k = find_key(key);
  if (!k) throw PreconditionError("unknown configuration key '" + key + "'");
  if (const std::string e = check_value(k->type, value); !e.empty()) throw PreconditionError(key + ": " + e);
  values_[key] = value;
}

double Config::real(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw PreconditionError("unknown configuration key '" + key + "'");
  double x = 0.0;
  std::from_chars(it->second.data(), it->second.data() + it->second.size(), x);
  return x;
}

long Config::integer(const std::string& key) const {
  const Key* k = find_key(key);
  if (!k || k->type != Type::Integer) throw PreconditionError("'" + key + "' is not an integer key");
  const std::string& v = values_.at(key);
  long x = 0;
  std::from_chars(v.data(), v.data() + v.size(), x);
  return x;
}

}  // namespace weyl
