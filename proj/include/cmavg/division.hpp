#ifndef CMAVG_DIVISION_HPP
#define CMAVG_DIVISION_HPP

// Division polynomials with exact integer coefficients, complete-splitting
// tests (the computational mirror of "p splits completely in Q(E[k])"),
// the exact 2-division field degree, and statistical estimation of n_k.

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cmavg/curve.hpp"
#include "cmavg/factor.hpp"
#include "cmavg/modmath.hpp"
#include "cmavg/poly_fp.hpp"
#include "cmavg/sieve.hpp"

namespace cmavg {

inline constexpr u32 kDivisionPolyMaxIndex = 60;

// psi_k with the y factor removed for even k; univariate in x, exact
// integer coefficients. k = 2 is the cubic x^3 + a4 x + a6 itself.
struct DivisionPolynomial {
  u32 k = 0;
  std::vector<mpz_class> coeffs;  // coeffs[i] multiplies x^i

  int degree() const {
    int d = static_cast<int>(coeffs.size()) - 1;
    while (d >= 0 && coeffs[d] == 0) --d;
    return d;
  }
};

namespace detail {

using ZPoly = std::vector<mpz_class>;

inline void ztrim(ZPoly& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

inline ZPoly zmul(const ZPoly& a, const ZPoly& b) {
  if (a.empty() || b.empty()) return {};
  ZPoly r(a.size() + b.size() - 1, mpz_class(0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  }
  ztrim(r);
  return r;
}

inline ZPoly zsub(ZPoly a, const ZPoly& b) {
  if (a.size() < b.size()) a.resize(b.size(), mpz_class(0));
  for (std::size_t i = 0; i < b.size(); ++i) a[i] -= b[i];
  ztrim(a);
  return a;
}

inline ZPoly zhalf(ZPoly a) {
  for (auto& c : a) {
    if (mpz_odd_p(c.get_mpz_t())) throw std::logic_error("division polynomial recurrence: odd coefficient before /2");
    c /= 2;
  }
  return a;
}

}  // namespace detail

// Exact W_k by the standard recurrence (big-integer arithmetic); all W_j,
// j <= k, are materialized along the way.
inline DivisionPolynomial division_polynomial(const CurveSpec& curve, u32 k) {
  using detail::ZPoly;
  if (k < 2 || k > kDivisionPolyMaxIndex)
    throw std::invalid_argument("division_polynomial: index must be in [2, " +
                                std::to_string(kDivisionPolyMaxIndex) + "]");
  mpz_class A(static_cast<long>(curve.a4)), B(static_cast<long>(curve.a6));
  ZPoly f{B, A, 0, 1};
  if (k == 2) return {2, f};
  ZPoly f2 = detail::zmul(f, f);
  std::vector<ZPoly> W(k + 1);
  W[1] = {1};
  W[2] = {2};
  W[3] = {-A * A, 12 * B, 6 * A, 0, 3};
  if (k >= 4)
    W[4] = {4 * (-8 * B * B - A * A * A), 4 * (-4 * A * B), 4 * (-5 * A * A), 4 * (20 * B), 4 * (5 * A), 0, 4};
  for (u32 j = 5; j <= k; ++j) {
    if (j & 1) {
      u32 m = (j - 1) / 2;
      ZPoly t1 = detail::zmul(W[m + 2], detail::zmul(W[m], detail::zmul(W[m], W[m])));
      ZPoly t2 = detail::zmul(W[m - 1], detail::zmul(W[m + 1], detail::zmul(W[m + 1], W[m + 1])));
      if (m % 2 == 0) t1 = detail::zmul(t1, f2);
      else t2 = detail::zmul(t2, f2);
      W[j] = detail::zsub(std::move(t1), t2);
    } else {
      u32 m = j / 2;
      ZPoly s1 = detail::zmul(W[m + 2], detail::zmul(W[m - 1], W[m - 1]));
      ZPoly s2 = detail::zmul(W[m - 2], detail::zmul(W[m + 1], W[m + 1]));
      W[j] = detail::zhalf(detail::zmul(W[m], detail::zsub(std::move(s1), s2)));
    }
  }
  return {k, std::move(W[k])};
}

// Reduce an exact division polynomial mod p.
inline Poly reduce_mod_p(const DivisionPolynomial& D, const PrimeField& F) {
  Poly r(D.coeffs.size(), F.zero());
  for (std::size_t i = 0; i < D.coeffs.size(); ++i) {
    mpz_class c = D.coeffs[i] % mpz_class(static_cast<unsigned long>(F.modulus()));
    if (c < 0) c += static_cast<unsigned long>(F.modulus());
    r[i] = F.from_int(c.get_ui());
  }
  poly_trim(r);
  return r;
}

// True iff E[k] lies inside E(F_p), decided without reference to d_p:
// prime-power parts of k are tested through the reduced division polynomial
// (full linear splitting, rational y's, k | p-1).
inline bool splits_completely(const CurveSpec& curve, u32 k, u64 p) {
  if (k < 1) throw std::invalid_argument("splits_completely: k must be >= 1");
  if (curve.is_bad_prime(p)) throw std::invalid_argument("splits_completely: p=" + std::to_string(p) + " is bad");
  if (k % p == 0)
    throw std::invalid_argument("splits_completely: p | k (ramified case excluded), p=" + std::to_string(p) +
                                " k=" + std::to_string(k));
  if (k == 1) return true;
  PrimeField F(p);
  auto A = F.from_sint(curve.a4), B = F.from_sint(curve.a6);
  for (const auto& [q, e] : factorize(k)) {
    u64 qa = 1;
    for (int i = 0; i < e; ++i) qa *= q;
    if (qa > kDivisionPolyMaxIndex)
      throw std::invalid_argument("splits_completely: prime-power part " + std::to_string(qa) + " beyond psi budget");
    if (!full_torsion_rational(F, A, B, static_cast<u32>(qa))) return false;
  }
  return true;
}

enum class NkMethod : u8 { exact_cubic = 0, chebotarev_sample = 1 };

struct DivisionFieldEstimate {
  u32 k = 0;
  double value = 0.0;   // n_k, exact or point estimate (lower bound if flagged)
  double sigma = 0.0;   // standard error, 0 for exact values
  u64 samples = 0;      // complete-splitting count behind the estimate
  bool exact = false;
  bool reliable = false;        // exact, or samples >= 30
  bool lower_bound_only = false;  // no splits observed: value is a lower bound
  NkMethod method = NkMethod::chebotarev_sample;
};

// n_2 = [Q(E[2]):Q] exactly, from the Galois group of the 2-division cubic.
inline DivisionFieldEstimate n2_exact(const CurveSpec& curve) {
  i128 A = curve.a4, B = curve.a6;
  // count integer roots of x^3 + A x + B (cubic is squarefree: disc != 0)
  int roots = 0;
  auto is_root = [&](i64 r) {
    i128 v = static_cast<i128>(r) * r * r + A * r + B;
    return v == 0;
  };
  if (curve.a6 == 0) {
    roots = 1;  // x = 0
    if (curve.a4 <= 0) {
      u64 m = static_cast<u64>(-curve.a4);
      u64 s = isqrt_u64(m);
      if (s * s == m && m != 0) roots += 2;  // x = +-sqrt(-a4)
    }
  } else {
    u64 a6abs = static_cast<u64>(curve.a6 < 0 ? -curve.a6 : curve.a6);
    for (u64 d : divisors_of(a6abs)) {
      i64 r = static_cast<i64>(d);
      if (is_root(r)) ++roots;
      if (is_root(-r)) ++roots;
    }
  }
  u32 n2;
  if (roots == 3) n2 = 1;
  else if (roots == 1) n2 = 2;
  else {
    // irreducible cubic: degree 3 if disc is a square, else 6
    i128 disc = -4 * A * A * A - 27 * B * B;
    bool square = false;
    if (disc > 0) {
      u128 d = static_cast<u128>(disc);
      u128 r = isqrt_u128(d);
      square = r * r == d;
    }
    n2 = square ? 3 : 6;
  }
  DivisionFieldEstimate est;
  est.k = 2;
  est.value = n2;
  est.exact = true;
  est.reliable = true;
  est.method = NkMethod::exact_cubic;
  return est;
}

// pi_E(x;k): good primes p <= x with k | d_p. Coverage of the record list
// is verified against a fresh sieve; the optional dual-oracle mode recounts
// through splits_completely and insists on equality.
inline u64 pi_E(const CurveSpec& curve, u64 x, u32 k, const std::vector<PrimeRecord>& records,
                bool dual_oracle_verify = false) {
  if (k == 0) throw std::invalid_argument("pi_E: k must be >= 1");
  std::vector<u64> expected;
  for (u64 p : primes_in_range(2, x + 1))
    if (!curve.is_bad_prime(p)) expected.push_back(p);
  std::size_t i = 0;
  for (u64 p : expected) {
    while (i < records.size() && records[i].p < p) ++i;
    if (i >= records.size() || records[i].p != p)
      throw std::runtime_error("pi_E: records do not cover good prime p=" + std::to_string(p));
  }
  u64 count = 0;
  for (const auto& r : records) {
    if (r.p > x) break;
    if (r.d_p % k == 0) ++count;
  }
  if (dual_oracle_verify) {
    u64 recount = 0;
    for (u64 p : expected) {
      if (k == 1) {
        ++recount;
      } else if (k % p == 0) {
        // p | k: ramified for the splitting test, fall back to the record
        for (const auto& r : records)
          if (r.p == p && r.d_p % k == 0) ++recount;
      } else if (splits_completely(curve, k, p)) {
        ++recount;
      }
    }
    if (recount != count)
      throw std::runtime_error("pi_E: dual-oracle mismatch at x=" + std::to_string(x) + " k=" + std::to_string(k) +
                               ": records say " + std::to_string(count) + ", splitting says " + std::to_string(recount));
  }
  return count;
}

// Chebotarev inversion: n_k estimated as pi(x_cal) / pi_E(x_cal; k) with a
// binomial standard error. Zero splits turn the output into a lower bound.
inline DivisionFieldEstimate nk_estimate(const CurveSpec& /*curve*/, u32 k,
                                         const std::vector<PrimeRecord>& records, u64 x_cal) {
  if (records.empty()) throw std::invalid_argument("nk_estimate: no records");
  u64 pi_total = prime_count(x_cal);
  u64 split = 0;
  for (const auto& r : records) {
    if (r.p > x_cal) break;
    if (r.d_p % k == 0) ++split;
  }
  DivisionFieldEstimate est;
  est.k = k;
  est.samples = split;
  est.method = NkMethod::chebotarev_sample;
  if (split == 0) {
    est.value = static_cast<double>(pi_total);  // n_k > pi(x_cal)
    est.lower_bound_only = true;
    est.reliable = false;
    return est;
  }
  double phat = static_cast<double>(split) / static_cast<double>(pi_total);
  double sigma_p = std::sqrt(phat * (1.0 - phat) / static_cast<double>(pi_total));
  est.value = 1.0 / phat;
  est.sigma = sigma_p / (phat * phat);
  est.reliable = split >= 30;
  return est;
}

}  // namespace cmavg

#endif  // CMAVG_DIVISION_HPP
