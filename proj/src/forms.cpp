#include "weyl/forms.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "weyl/arith.hpp"
#include "weyl/error.hpp"
#include "weyl/fit.hpp"

namespace weyl {

std::string to_string(i128 v) {
  if (v == 0) return "0";
  const bool neg = v < 0;
  std::string s;
  while (v != 0) {
    const int d = static_cast<int>(v % 10);
    s.push_back(static_cast<char>('0' + (neg ? -d : d)));
    v /= 10;
  }
  if (neg) s.push_back('-');
  std::reverse(s.begin(), s.end());
  return s;
}

cplx CuspForm::lam(long n) const {
  if (n < 1 || n > n_max())
    throw RangeError("lambda(" + std::to_string(n) + ") outside stored range 1.." + std::to_string(n_max()));
  return lambda[static_cast<std::size_t>(n)];
}

cplx CuspForm::chi_at(long long a) const { return chi[static_cast<std::size_t>(mod(a, level))]; }

namespace {

struct Term {
  long e;
  long c;
};

// sum_k (-1)^k (2k+1) q^{k(k+1)/2} up to q^n
std::vector<Term> eta_cubed(long n) {
  std::vector<Term> t;
  for (long k = 0; k * (k + 1) / 2 <= n; ++k) t.push_back({k * (k + 1) / 2, (k % 2 ? -1 : 1) * (2 * k + 1)});
  return t;
}

void multiply_sparse(const std::vector<Term>& s, const std::vector<i128>& d, std::vector<i128>& out, Exec exec) {
  const long n = static_cast<long>(d.size());
  i128 dmax = 0;
  for (const i128 v : d) dmax = std::max(dmax, v < 0 ? -v : v);
  long double ssum = 0;
  for (const Term& t : s) ssum += std::abs(t.c);
  if (static_cast<long double>(dmax) * ssum >= std::ldexp(1.0L, 126))
    throw RangeError("ramanujan_tau: intermediate exceeds the 128-bit budget");
  auto row = [&](long i) {
    i128 acc = 0;
    for (const Term& t : s) {
      if (t.e > i) break;
      acc += static_cast<i128>(t.c) * d[static_cast<std::size_t>(i - t.e)];
    }
    out[static_cast<std::size_t>(i)] = acc;
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 2048)
    for (long i = 0; i < n; ++i) row(i);
  } else {
    for (long i = 0; i < n; ++i) row(i);
  }
}

}  // namespace

std::vector<i128> ramanujan_tau(long n_max, Exec exec) {
  if (n_max < 1) throw PreconditionError("ramanujan_tau: n_max must be positive");
  const long n = n_max - 1;
  const auto s = eta_cubed(n);
  std::vector<i128> cur(static_cast<std::size_t>(n) + 1, 0), next(cur.size());
  for (const Term& t : s) cur[static_cast<std::size_t>(t.e)] = t.c;
  for (int p = 2; p <= 8; ++p) {
    multiply_sparse(s, cur, next, exec);
    cur.swap(next);
  }
  std::vector<i128> tau(static_cast<std::size_t>(n_max) + 1, 0);
  std::copy(cur.begin(), cur.end(), tau.begin() + 1);
  return tau;
}

CuspForm delta_form(long n_max, Exec exec) {
  if (n_max < 1 || n_max > 1000000) throw PreconditionError("delta_form: n_max must lie in [1, 10^6]");
  const auto tau = ramanujan_tau(n_max, exec);
  CuspForm f;
  f.kind = Holomorphic{12};
  f.level = 1;
  f.chi = trivial_character(1);
  f.lambda.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  for (long m = 1; m <= n_max; ++m) {
    const long double x = static_cast<long double>(m);
    const long double v = static_cast<long double>(tau[static_cast<std::size_t>(m)]) / (std::pow(x, 5) * std::sqrt(x));
    f.lambda[static_cast<std::size_t>(m)] = static_cast<double>(v);
  }
  f.epsilon_f = cplx(1.0);  // i^k
  f.eta_M = 1.0;
  return f;
}

std::vector<cplx> trivial_character(int level) {
  std::vector<cplx> chi(static_cast<std::size_t>(level), 0.0);
  for (int a = 0; a < level; ++a)
    if (std::gcd(a, level) == 1) chi[static_cast<std::size_t>(a)] = 1.0;
  return chi;
}

void validate_character(int level, const std::vector<cplx>& chi, double tol) {
  if (level < 1) throw PreconditionError("character: level must be positive");
  if (static_cast<int>(chi.size()) != level)
    throw PreconditionError("character: table has " + std::to_string(chi.size()) + " entries, expected " +
                            std::to_string(level));
  for (int a = 0; a < level; ++a) {
    const double m = std::abs(chi[static_cast<std::size_t>(a)]);
    const bool unit = std::gcd(a, level) == 1;
    if (unit ? std::abs(m - 1.0) > tol : m > tol)
      throw PreconditionError("character: chi(" + std::to_string(a) + ") has the wrong modulus");
  }
  if (std::abs(chi[1 % level] - 1.0) > tol) throw PreconditionError("character: chi(1) != 1");
  for (int a = 0; a < level; ++a)
    for (int b = a; b < level; ++b)
      if (std::abs(chi[static_cast<std::size_t>(a * b % level)] -
                   chi[static_cast<std::size_t>(a)] * chi[static_cast<std::size_t>(b)]) > tol)
        throw PreconditionError("character: not multiplicative at (" + std::to_string(a) + ", " +
                                std::to_string(b) + ")");
}

HeckeReport hecke_verify(const CuspForm& form, long n_max, double tol) {
  if (n_max > form.n_max()) throw PreconditionError("hecke_verify: coefficients stop before n_max");
  HeckeReport r;
  r.n_max = n_max;
  auto record = [&](long n, long m1, long m2, double dev) {
    ++r.checks;
    r.max_violation = std::max(r.max_violation, dev);
    if (!r.violated && dev > tol) {
      r.violated = true;
      r.n = n;
      r.m1 = m1;
      r.m2 = m2;
      r.deviation = dev;
    }
  };
  if (n_max < 1) return r;
  record(1, 1, 1, std::abs(form.lam(1) - 1.0));
  const auto spf = smallest_prime_factors(n_max);
  std::vector<long> pp;
  for (long n = 2; n <= n_max; ++n) {
    const auto fac = factorize(n, spf);
    if (fac.size() == 1) {
      const auto [p, e] = fac[0];
      if (e < 2) continue;
      const long pk = n / p, pk1 = pk / p;
      const cplx lhs = form.lam(p) * form.lam(pk);
      const cplx rhs = form.lam(n) + form.chi_at(p) * form.lam(pk1);
      record(n, p, pk, std::abs(lhs - rhs));
      continue;
    }
    pp.clear();
    for (const auto& [p, e] : fac) {
      long q = 1;
      for (int i = 0; i < e; ++i) q *= p;
      pp.push_back(q);
    }
    // Unitary splits n = m1 m2 with 1 < m1 < m2.
    const unsigned subsets = 1u << pp.size();
    std::vector<std::pair<long, long>> splits;
    for (unsigned mask = 1; mask + 1 < subsets; ++mask) {
      long m1 = 1;
      for (std::size_t i = 0; i < pp.size(); ++i)
        if (mask >> i & 1u) m1 *= pp[i];
      const long m2 = n / m1;
      if (m1 < m2) splits.emplace_back(m1, m2);
    }
    std::sort(splits.begin(), splits.end());
    for (const auto& [m1, m2] : splits) record(n, m1, m2, std::abs(form.lam(n) - form.lam(m1) * form.lam(m2)));
  }
  return r;
}

RankinReport rankin_average(const CuspForm& form, std::span<const double> x_values) {
  RankinReport r;
  if (x_values.empty()) return r;
  std::vector<double> xs(x_values.begin(), x_values.end());
  for (const double x : xs)
    if (!(x >= 1.0) || static_cast<long>(std::floor(x)) > form.n_max())
      throw PreconditionError("rankin_average: x outside the stored range");
  std::vector<double> sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  long n = 0;
  double acc = 0.0;
  std::vector<double> sums(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const long top = static_cast<long>(std::floor(sorted[i]));
    while (n < top) {
      ++n;
      acc += std::norm(form.lam(n));
    }
    sums[i] = acc;
  }
  for (const double x : xs) {
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), x);
    const double s = sums[static_cast<std::size_t>(it - sorted.begin())];
    r.x.push_back(x);
    r.sum.push_back(s);
    r.avg.push_back(s / x);
  }
  if (xs.size() >= 2) r.slope = fit_loglog(r.x, r.sum).slope;
  return r;
}

// ---- coefficient files ----

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt(cplx z) { return fmt(z.real()) + ":" + fmt(z.imag()); }

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool parse_long(std::string_view s, long& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool parse_cplx(std::string_view s, cplx& out) {
  const auto colon = s.find(':');
  double re = 0.0, im = 0.0;
  if (colon == std::string_view::npos) {
    if (!parse_double(s, re)) return false;
  } else if (!parse_double(s.substr(0, colon), re) || !parse_double(s.substr(colon + 1), im)) {
    return false;
  }
  out = {re, im};
  return true;
}

}  // namespace

void export_form(const CuspForm& form, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path, 0, "cannot open for writing");
  if (const auto* h = std::get_if<Holomorphic>(&form.kind)) {
    out << "#kind holomorphic\n#k " << h->k << '\n';
  } else {
    const auto& m = std::get<Maass>(form.kind);
    out << "#kind maass\n#ell " << fmt(m.ell) << "\n#delta " << m.delta << "\n#eps_g " << form.epsilon_g << '\n';
  }
  out << "#M " << form.level << "\n#chi ";
  for (std::size_t a = 0; a < form.chi.size(); ++a) out << (a ? "," : "") << fmt(form.chi[a]);
  out << '\n';
  if (form.epsilon_f) out << "#eps_f " << fmt(*form.epsilon_f) << '\n';
  out << "#eta " << fmt(form.eta_M) << "\n#n_max " << form.n_max() << "\n#tol " << fmt(form.tol) << '\n';
  for (long n = 1; n <= form.n_max(); ++n) {
    const cplx v = form.lambda[static_cast<std::size_t>(n)];
    out << n << ' ' << fmt(v.real());
    if (v.imag() != 0.0) out << ' ' << fmt(v.imag());
    out << '\n';
  }
  if (!out) throw ParseError(path, 0, "write failed");
}

CuspForm load_form(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open coefficient file");
  CuspForm f;
  f.lambda.assign(1, 0.0);
  std::string kind;
  long k = -1, delta = 0, eps_g = 1, level = -1, n_max = -1, chi_line = 0;
  cplx ell = 0.0;
  bool have_chi = false;
  f.tol = 1e-9;
  std::string line;
  long lineno = 0;
  auto fail = [&](const std::string& msg) -> ParseError { return ParseError(path, lineno, msg); };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line.rfind("# ", 0) == 0 || line == "#") continue;  // comment
    if (line[0] == '#') {
      std::istringstream ss(line.substr(1));
      std::string key, val, extra;
      if (!(ss >> key >> val) || (ss >> extra)) throw fail("malformed header line");
      if (f.n_max() > 0) throw fail("header after coefficient data");
      if (key == "kind") {
        if (val != "holomorphic" && val != "maass") throw fail("unknown kind '" + val + "'");
        kind = val;
      } else if (key == "k") {
        if (!parse_long(val, k)) throw fail("bad k");
      } else if (key == "ell") {
        if (!parse_cplx(val, ell)) throw fail("bad ell");
      } else if (key == "delta") {
        if (!parse_long(val, delta) || (delta != 0 && delta != 1)) throw fail("bad delta");
      } else if (key == "eps_g") {
        if (!parse_long(val, eps_g) || (eps_g != 1 && eps_g != -1)) throw fail("bad eps_g");
      } else if (key == "M") {
        if (!parse_long(val, level) || level < 1) throw fail("bad M");
      } else if (key == "chi") {
        f.chi.clear();
        std::string_view rest(val);
        while (true) {
          const auto comma = rest.find(',');
          cplx z;
          if (!parse_cplx(rest.substr(0, comma), z)) throw fail("bad chi entry");
          f.chi.push_back(z);
          if (comma == std::string_view::npos) break;
          rest.remove_prefix(comma + 1);
        }
        have_chi = true;
        chi_line = lineno;
      } else if (key == "eps_f") {
        cplx z;
        if (!parse_cplx(val, z)) throw fail("bad eps_f");
        f.epsilon_f = z;
      } else if (key == "eta") {
        if (!parse_cplx(val, f.eta_M)) throw fail("bad eta");
      } else if (key == "n_max") {
        if (!parse_long(val, n_max) || n_max < 1) throw fail("bad n_max");
      } else if (key == "tol") {
        if (!parse_double(val, f.tol) || !(f.tol > 0)) throw fail("bad tol");
      } else {
        throw fail("unknown header key '" + key + "'");
      }
      continue;
    }
    std::istringstream ss(line);
    std::string sn, sre, sim, extra;
    ss >> sn >> sre;
    const bool has_im = static_cast<bool>(ss >> sim);
    if (ss >> extra) throw fail("too many fields");
    long n = 0;
    double re = 0.0, im = 0.0;
    if (!parse_long(sn, n) || !parse_double(sre, re) || (has_im && !parse_double(sim, im)))
      throw fail("malformed coefficient line");
    if (n != f.n_max() + 1) throw fail("coefficient index " + sn + " out of sequence");
    f.lambda.emplace_back(re, im);
  }
  ++lineno;
  if (kind.empty()) throw fail("missing #kind");
  if (level < 0) throw fail("missing #M");
  if (f.n_max() == 0) throw fail("no coefficients");
  if (n_max >= 0 && n_max != f.n_max()) throw fail("#n_max does not match the coefficient count");
  if (kind == "holomorphic") {
    if (k < 1) throw fail("missing #k");
    f.kind = Holomorphic{static_cast<int>(k)};
  } else {
    f.kind = Maass{ell, static_cast<int>(delta)};
    f.epsilon_g = static_cast<int>(eps_g);
  }
  f.level = static_cast<int>(level);
  try {
    validate_kind(f.kind);
  } catch (const Error& e) {
    throw fail(e.what());
  }
  if (!have_chi) {
    f.chi = trivial_character(f.level);
  } else {
    try {
      validate_character(f.level, f.chi);
    } catch (const PreconditionError& e) {
      lineno = chi_line;
      throw fail(e.what());
    }
  }
  if (f.epsilon_f && std::abs(std::abs(*f.epsilon_f) - 1.0) > 1e-12) throw fail("|eps_f| != 1");
  if (std::abs(std::abs(f.eta_M) - 1.0) > 1e-12) throw fail("|eta| != 1");
  const HeckeReport h = hecke_verify(f, f.n_max(), f.tol);
  if (h.violated)
    throw HeckeViolation(path + ": Hecke relation fails at n = " + std::to_string(h.n) + " (" + std::to_string(h.m1) +
                             ", " + std::to_string(h.m2) + "), deviation " + fmt(h.deviation),
                         h.n, h.m1, h.m2);
  return f;
}

}  // namespace weyl
