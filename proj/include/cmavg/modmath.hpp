#ifndef CMAVG_MODMATH_HPP
#define CMAVG_MODMATH_HPP

// Arithmetic modulo an odd prime p < 2^62 (Montgomery representation
// internally, canonical representatives in [0,p) at the boundaries),
// plus the elementary arithmetic functions mu and phi with the exact
// identities they must satisfy.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace cmavg {

using u8 = std::uint8_t;
using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;
using i128 = __int128;

inline u64 isqrt_u64(u64 n) {
  if (n == 0) return 0;
  u64 r = static_cast<u64>(std::sqrt(static_cast<double>(n)));
  while (r > 0 && r * r > n) --r;
  while ((r + 1) * (r + 1) <= n && (r + 1) != 0) ++r;
  return r;
}

inline u64 splitmix64(u64 x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline u64 fnv1a(const std::string& s) {
  u64 h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string u128_to_string(u128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v) {
    s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

inline u128 isqrt_u128(u128 n) {
  if (n == 0) return 0;
  u128 r = static_cast<u128>(std::sqrt(static_cast<double>(static_cast<u64>(n >> 64)) * 18446744073709551616.0 +
                                       static_cast<double>(static_cast<u64>(n))));
  while (r > 0 && r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

inline u64 mulmod_u64(u64 a, u64 b, u64 m) {
  return static_cast<u64>(static_cast<u128>(a) * b % m);
}

inline u64 powmod_u64(u64 a, u64 e, u64 m) {
  u64 r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod_u64(r, a, m);
    a = mulmod_u64(a, a, m);
    e >>= 1;
  }
  return r;
}

// Deterministic Miller-Rabin, valid for all n < 2^64.
inline bool is_prime_u64(u64 n) {
  if (n < 2) return false;
  for (u64 q : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n % q == 0) return n == q;
  }
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) { d >>= 1; ++s; }
  for (u64 a : {2ull, 325ull, 9375ull, 28178ull, 450775ull, 9780504ull, 1795265022ull}) {
    u64 x = powmod_u64(a % n, d, n);
    if (x == 0 || x == 1 || x == n - 1) continue;
    bool witness = true;
    for (int i = 1; i < s; ++i) {
      x = mulmod_u64(x, x, n);
      if (x == n - 1) { witness = false; break; }
    }
    if (witness) return false;
  }
  return true;
}

// Jacobi symbol (a/n) for odd n > 0.
inline int jacobi(u64 a, u64 n) {
  a %= n;
  int t = 1;
  while (a != 0) {
    while ((a & 1) == 0) {
      a >>= 1;
      u64 r = n & 7;
      if (r == 3 || r == 5) t = -t;
    }
    std::swap(a, n);
    if ((a & 3) == 3 && (n & 3) == 3) t = -t;
    a %= n;
  }
  return n == 1 ? t : 0;
}

// Prime field F_p, p an odd prime < 2^62. Elements are carried in
// Montgomery form (R = 2^64); conversion happens only at from_int/to_int.
class PrimeField {
 public:
  struct Fp {
    u64 v = 0;
    friend bool operator==(Fp a, Fp b) { return a.v == b.v; }
  };

  explicit PrimeField(u64 p) : p_(p) {
    if (p < 3 || (p & 1) == 0) throw std::invalid_argument("PrimeField: modulus must be an odd prime");
    if (p >= (u64{1} << 62)) throw std::invalid_argument("PrimeField: modulus must be < 2^62");
    if (!is_prime_u64(p)) throw std::invalid_argument("PrimeField: modulus " + std::to_string(p) + " is not prime");
    // ninv = -p^{-1} mod 2^64 by Newton iteration
    u64 inv = p;
    for (int i = 0; i < 5; ++i) inv *= 2 - p * inv;
    ninv_ = ~inv + 1;
    u64 r = static_cast<u64>((u128{1} << 64) % p);
    r2_ = static_cast<u64>(static_cast<u128>(r) * r % p);
    one_ = Fp{r};
  }

  u64 modulus() const { return p_; }
  Fp zero() const { return Fp{0}; }
  Fp one() const { return one_; }
  bool is_zero(Fp a) const { return a.v == 0; }

  Fp from_int(u64 x) const { return mul(Fp{x % p_}, Fp{r2_}); }
  Fp from_sint(i64 x) const {
    i64 r = x % static_cast<i64>(p_);
    if (r < 0) r += static_cast<i64>(p_);
    return from_int(static_cast<u64>(r));
  }
  u64 to_int(Fp a) const { return redc(static_cast<u128>(a.v)); }

  Fp add(Fp a, Fp b) const {
    u64 s = a.v + b.v;
    if (s >= p_ || s < a.v) s -= p_;
    return Fp{s};
  }
  Fp sub(Fp a, Fp b) const { return Fp{a.v >= b.v ? a.v - b.v : a.v + p_ - b.v}; }
  Fp neg(Fp a) const { return Fp{a.v == 0 ? 0 : p_ - a.v}; }
  Fp mul(Fp a, Fp b) const { return Fp{redc(static_cast<u128>(a.v) * b.v)}; }
  Fp sqr(Fp a) const { return mul(a, a); }

  Fp pow(Fp a, u64 e) const {
    Fp r = one_;
    while (e) {
      if (e & 1) r = mul(r, a);
      a = sqr(a);
      e >>= 1;
    }
    return r;
  }

  Fp inv(Fp a) const {
    if (a.v == 0) throw std::domain_error("PrimeField: inverse of 0 mod " + std::to_string(p_));
    return pow(a, p_ - 2);
  }

  Fp half(Fp a) const { return mul(a, from_int((p_ + 1) / 2)); }

  // Legendre symbol of a canonical integer a.
  int legendre(u64 a) const {
    a %= p_;
    if (a == 0) return 0;
    return jacobi(a, p_);
  }

  // Square root of a quadratic residue; canonical output min(r, p-r).
  u64 sqrt(u64 a) const {
    a %= p_;
    if (a == 0) return 0;
    if (legendre(a) != 1) throw std::domain_error("PrimeField::sqrt: " + std::to_string(a) + " is not a residue mod " + std::to_string(p_));
    u64 r;
    if ((p_ & 3) == 3) {
      r = to_int(pow(from_int(a), (p_ + 1) / 4));
    } else {
      // Tonelli-Shanks with the least non-residue as generator
      u64 q = p_ - 1;
      int s = 0;
      while ((q & 1) == 0) { q >>= 1; ++s; }
      u64 z = 2;
      while (jacobi(z, p_) != -1) ++z;
      Fp c = pow(from_int(z), q);
      Fp t = pow(from_int(a), q);
      Fp x = pow(from_int(a), (q + 1) / 2);
      int m = s;
      while (!(t == one_)) {
        Fp tt = t;
        int i = 0;
        while (!(tt == one_)) { tt = sqr(tt); ++i; }
        Fp b = c;
        for (int j = 0; j < m - i - 1; ++j) b = sqr(b);
        m = i;
        c = sqr(b);
        t = mul(t, c);
        x = mul(x, b);
      }
      r = to_int(x);
    }
    return std::min(r, p_ - r);
  }

 private:
  u64 redc(u128 t) const {
    u64 m = static_cast<u64>(t) * ninv_;
    u128 u = (t + static_cast<u128>(m) * p_) >> 64;
    u64 r = static_cast<u64>(u);
    if (r >= p_) r -= p_;
    return r;
  }

  u64 p_;
  u64 ninv_;
  u64 r2_;
  Fp one_;
};

// Exact rational with small numerator/denominator, always normalized, den > 0.
struct Rational {
  i64 num = 0;
  i64 den = 1;

  Rational() = default;
  Rational(i64 n, i64 d) : num(n), den(d) {
    if (den == 0) throw std::invalid_argument("Rational: zero denominator");
    if (den < 0) { num = -num; den = -den; }
    i64 g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) { num /= g; den /= g; }
  }
  static Rational integer(i64 n) { return Rational(n, 1); }

  Rational operator+(Rational o) const { return Rational(num * o.den + o.num * den, den * o.den); }
  Rational operator-(Rational o) const { return Rational(num * o.den - o.num * den, den * o.den); }
  Rational operator*(Rational o) const { return Rational(num * o.num, den * o.den); }
  friend bool operator==(Rational a, Rational b) { return a.num == b.num && a.den == b.den; }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  Rational abs() const { return Rational(num < 0 ? -num : num, den); }
  bool operator<=(Rational o) const { return num * o.den <= o.num * den; }
};

// Sieved Moebius and Euler-phi tables on [1, K], checked on construction
// against the two exact identities they feed (sum_{dm|k} mu(d)/m = 1/k and
// sum_{dm|k} m mu(d) = k) for all k up to min(K, 10^4).
struct ArithmeticFunctionTable {
  u32 K = 0;
  std::vector<int8_t> mu;  // mu[0] unused
  std::vector<u64> phi;    // phi[0] unused

  int8_t moebius(u32 k) const { return mu.at(k); }
  u64 totient(u32 k) const { return phi.at(k); }
};

namespace detail {

// Integer form of sum_{dm|k} mu(d)/m: multiply through by k, so the
// identity reads sum over pairs (d,m), dm|k, of mu(d) * (k/m) == 1.
inline i64 identity_mu_over_m_times_k(u32 k, const std::vector<int8_t>& mu) {
  i64 s = 0;
  for (u32 j = 1; j <= k; ++j) {
    if (k % j != 0) continue;
    for (u32 d = 1; d * d <= j; ++d) {
      if (j % d != 0) continue;
      u32 m1 = j / d;
      s += mu[d] * static_cast<i64>(k / m1);
      if (d != m1) s += mu[m1] * static_cast<i64>(k / d);
    }
  }
  return s;
}

inline i64 identity_m_mu(u32 k, const std::vector<int8_t>& mu) {
  i64 s = 0;
  for (u32 j = 1; j <= k; ++j) {
    if (k % j != 0) continue;
    for (u32 d = 1; d * d <= j; ++d) {
      if (j % d != 0) continue;
      u32 m1 = j / d;
      s += static_cast<i64>(mu[d]) * m1;
      if (d != m1) s += static_cast<i64>(mu[m1]) * d;
    }
  }
  return s;
}

}  // namespace detail

inline ArithmeticFunctionTable build_arithmetic_tables(u32 K) {
  if (K < 1) throw std::invalid_argument("build_arithmetic_tables: K must be >= 1");
  ArithmeticFunctionTable t;
  t.K = K;
  t.mu.assign(K + 1, 0);
  t.phi.assign(K + 1, 0);
  t.mu[1] = 1;
  t.phi[1] = 1;
  std::vector<u32> primes;
  std::vector<bool> composite(K + 1, false);
  for (u32 i = 2; i <= K; ++i) {
    if (!composite[i]) {
      primes.push_back(i);
      t.mu[i] = -1;
      t.phi[i] = i - 1;
    }
    for (u32 q : primes) {
      u64 iq = static_cast<u64>(i) * q;
      if (iq > K) break;
      composite[iq] = true;
      if (i % q == 0) {
        t.mu[iq] = 0;
        t.phi[iq] = t.phi[i] * q;
        break;
      }
      t.mu[iq] = -t.mu[i];
      t.phi[iq] = t.phi[i] * (q - 1);
    }
  }
  u32 check_to = std::min<u32>(K, 10000);
  for (u32 k = 1; k <= check_to; ++k) {
    if (detail::identity_mu_over_m_times_k(k, t.mu) != 1)
      throw std::logic_error("arithmetic table identity sum mu(d)/m failed at k=" + std::to_string(k));
    if (detail::identity_m_mu(k, t.mu) != static_cast<i64>(k))
      throw std::logic_error("arithmetic table identity sum m*mu(d) failed at k=" + std::to_string(k));
  }
  return t;
}

}  // namespace cmavg

#endif  // CMAVG_MODMATH_HPP
