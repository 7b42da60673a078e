#ifndef CMAVG_FACTOR_HPP
#define CMAVG_FACTOR_HPP

// Integer factorization at group-order scale: trial division by sieved small
// primes, Brent's rho with deterministic seeds as the backstop.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "cmavg/modmath.hpp"
#include "cmavg/sieve.hpp"

namespace cmavg {

inline const std::vector<u64>& trial_primes() {
  static const std::vector<u64> ps = small_primes_upto(1000000);
  return ps;
}

inline u64 pollard_rho(u64 n) {
  // Brent's variant, deterministic constant sequence.
  for (u64 c = 1; c < 64; ++c) {
    u64 x = 2, y = 2, d = 1;
    u64 power = 1, lam = 1;
    while (d == 1) {
      if (power == lam) {
        x = y;
        power <<= 1;
        lam = 0;
      }
      y = (mulmod_u64(y, y, n) + c) % n;
      ++lam;
      u64 diff = x > y ? x - y : y - x;
      d = std::gcd(diff, n);
    }
    if (d != n) return d;
  }
  throw std::runtime_error("pollard_rho: failed to split " + std::to_string(n));
}

struct PrimePower {
  u64 prime;
  int exp;
};

inline void factorize_into(u64 n, std::vector<PrimePower>& out) {
  if (n <= 1) return;
  if (is_prime_u64(n)) {
    out.push_back({n, 1});
    return;
  }
  u64 d = pollard_rho(n);
  factorize_into(d, out);
  factorize_into(n / d, out);
}

inline std::vector<PrimePower> factorize(u64 n) {
  std::vector<PrimePower> out;
  for (u64 q : trial_primes()) {
    if (q * q > n) break;
    if (n % q == 0) {
      int e = 0;
      while (n % q == 0) { n /= q; ++e; }
      out.push_back({q, e});
    }
  }
  if (n > 1) {
    std::vector<PrimePower> rest;
    factorize_into(n, rest);
    std::sort(rest.begin(), rest.end(), [](auto a, auto b) { return a.prime < b.prime; });
    for (std::size_t i = 0; i < rest.size();) {
      std::size_t j = i;
      int e = 0;
      while (j < rest.size() && rest[j].prime == rest[i].prime) { e += rest[j].exp; ++j; }
      out.push_back({rest[i].prime, e});
      i = j;
    }
  }
  std::sort(out.begin(), out.end(), [](auto a, auto b) { return a.prime < b.prime; });
  return out;
}

inline std::vector<u64> divisors_of(u64 n) {
  std::vector<u64> divs{1};
  for (const auto& [q, e] : factorize(n)) {
    std::size_t sz = divs.size();
    u64 qe = 1;
    for (int i = 0; i < e; ++i) {
      qe *= q;
      for (std::size_t j = 0; j < sz; ++j) divs.push_back(divs[j] * qe);
    }
  }
  std::sort(divs.begin(), divs.end());
  return divs;
}

}  // namespace cmavg

#endif  // CMAVG_FACTOR_HPP
