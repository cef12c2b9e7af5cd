#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

namespace weyl {

// Smallest prime factor for 0..n (spf[0] = spf[1] = 0).
inline std::vector<int> smallest_prime_factors(long n) {
  std::vector<int> spf(static_cast<std::size_t>(n) + 1, 0);
  for (long i = 2; i <= n; ++i) {
    if (spf[i] != 0) continue;
    for (long j = i; j <= n; j += i)
      if (spf[j] == 0) spf[j] = static_cast<int>(i);
  }
  return spf;
}

inline std::vector<long> primes_in(long lo, long hi) {
  std::vector<long> out;
  if (hi < 2) return out;
  const auto spf = smallest_prime_factors(hi);
  for (long p = std::max(lo, 2L); p <= hi; ++p)
    if (spf[p] == p) out.push_back(p);
  return out;
}

inline bool is_prime(long n) {
  if (n < 2) return false;
  for (long d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

inline long mod(long long a, long m) {
  long long r = a % m;
  return static_cast<long>(r < 0 ? r + m : r);
}

// Inverse of a mod m; requires gcd(a, m) = 1. Returns 0 for m = 1.
inline long inverse_mod(long long a, long m) {
  if (m == 1) return 0;
  long long t = 0, nt = 1, r = m, nr = mod(a, m);
  while (nr != 0) {
    const long long q = r / nr;
    t -= q * nt;
    std::swap(t, nt);
    r -= q * nr;
    std::swap(r, nr);
  }
  return mod(t, m);
}

// Prime factorization as (p, e) pairs using an spf table covering n.
inline std::vector<std::pair<long, int>> factorize(long n, const std::vector<int>& spf) {
  std::vector<std::pair<long, int>> f;
  while (n > 1) {
    const long p = spf[n];
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    f.emplace_back(p, e);
  }
  return f;
}

}  // namespace weyl
