#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "weyl/common.hpp"
#include "weyl/specialfn.hpp"

namespace weyl {

__extension__ typedef __int128 i128;

std::string to_string(i128 v);

// Hecke cusp form data: normalized eigenvalues lambda(n) for 1 <= n <= n_max.
struct CuspForm {
  GammaFactorKind kind = Holomorphic{12};
  int level = 1;
  std::vector<cplx> chi{cplx(1.0)};  // chi[a] for a = 0..level-1
  std::vector<cplx> lambda;          // lambda[n]; lambda[0] unused
  std::optional<cplx> epsilon_f;
  cplx eta_M{1.0, 0.0};
  int epsilon_g = 1;  // Maass only
  double tol = 1e-12;

  long n_max() const { return lambda.empty() ? 0 : static_cast<long>(lambda.size()) - 1; }
  // Throws RangeError past n_max.
  cplx lam(long n) const;
  cplx chi_at(long long a) const;
  bool is_maass() const { return std::holds_alternative<Maass>(kind); }
  bool operator==(const CuspForm&) const = default;
};

// tau(n) for 0 <= n <= n_max (tau(0) = 0), exactly, from q prod (1 - q^n)^24 = q (sum (-1)^k (2k+1) q^{k(k+1)/2})^8.
// Throws RangeError if an intermediate could exceed 2^126.
std::vector<i128> ramanujan_tau(long n_max, Exec exec = Exec::Parallel);

// Weight 12, level 1; lambda(n) = tau(n) / n^{11/2}. Requires n_max <= 10^6.
CuspForm delta_form(long n_max, Exec exec = Exec::Parallel);

std::vector<cplx> trivial_character(int level);
// Throws PreconditionError unless chi is a Dirichlet character table mod level.
void validate_character(int level, const std::vector<cplx>& chi, double tol = 1e-12);

struct HeckeReport {
  long n_max = 0;
  long checks = 0;
  double max_violation = 0.0;
  // First (smallest n) relation violated beyond tol, as (n, m1, m2): either n = m1 m2 with
  // gcd(m1, m2) = 1, or n = p^{k+1} with (m1, m2) = (p, p^k).
  bool violated = false;
  long n = 0, m1 = 0, m2 = 0;
  double deviation = 0.0;
};

// lambda(m n) = lambda(m) lambda(n) for coprime m, n and
// lambda(p) lambda(p^k) = lambda(p^{k+1}) + chi(p) lambda(p^{k-1}) for n <= n_max.
HeckeReport hecke_verify(const CuspForm& form, long n_max, double tol = 1e-12);

struct RankinReport {
  std::vector<double> x;
  std::vector<double> sum;  // sum_{n <= x} |lambda(n)|^2
  std::vector<double> avg;  // sum / x
  double slope = 0.0;       // log-log slope of sum against x
};

RankinReport rankin_average(const CuspForm& form, std::span<const double> x_values);

// Coefficient file: `#key value` header lines, then `n re [im]` lines with n = 1, 2, ...
// Complex header values are written re:im. Lines starting with "# " are comments.
void export_form(const CuspForm& form, const std::string& path);
// Throws ParseError (with line number), PreconditionError for inconsistent metadata,
// HeckeViolation naming the first offending triple.
CuspForm load_form(const std::string& path);

}  // namespace weyl
