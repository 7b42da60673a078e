#ifndef CMAVG_POLY_FP_HPP
#define CMAVG_POLY_FP_HPP

// Dense univariate polynomials over F_p, plus the division-polynomial
// recurrence evaluated directly mod p and the full-torsion witnesses built
// on it. Degrees stay small ( psi_k for k <= 60), so all products are naive.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cmavg/modmath.hpp"

namespace cmavg {

using Poly = std::vector<PrimeField::Fp>;  // coeff[i] multiplies x^i

inline int poly_deg(const Poly& a) {
  int d = static_cast<int>(a.size()) - 1;
  while (d >= 0 && a[d].v == 0) --d;
  return d;
}

inline void poly_trim(Poly& a) { a.resize(static_cast<std::size_t>(poly_deg(a) + 1)); }

inline Poly poly_mul(const PrimeField& F, const Poly& a, const Poly& b) {
  if (a.empty() || b.empty()) return {};
  Poly r(a.size() + b.size() - 1, F.zero());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].v == 0) continue;
    for (std::size_t j = 0; j < b.size(); ++j)
      r[i + j] = F.add(r[i + j], F.mul(a[i], b[j]));
  }
  poly_trim(r);
  return r;
}

inline Poly poly_sub(const PrimeField& F, Poly a, const Poly& b) {
  if (a.size() < b.size()) a.resize(b.size(), F.zero());
  for (std::size_t i = 0; i < b.size(); ++i) a[i] = F.sub(a[i], b[i]);
  poly_trim(a);
  return a;
}

inline Poly poly_scale(const PrimeField& F, Poly a, PrimeField::Fp c) {
  for (auto& x : a) x = F.mul(x, c);
  poly_trim(a);
  return a;
}

// Remainder of a modulo m (m nonzero).
inline Poly poly_rem(const PrimeField& F, Poly a, const Poly& m) {
  int dm = poly_deg(m);
  if (dm < 0) throw std::invalid_argument("poly_rem: zero modulus");
  PrimeField::Fp lead_inv = F.inv(m[dm]);
  for (int da = poly_deg(a); da >= dm; da = poly_deg(a)) {
    PrimeField::Fp c = F.mul(a[da], lead_inv);
    int shift = da - dm;
    for (int i = 0; i <= dm; ++i)
      a[shift + i] = F.sub(a[shift + i], F.mul(c, m[i]));
  }
  poly_trim(a);
  return a;
}

inline Poly poly_mulmod(const PrimeField& F, const Poly& a, const Poly& b, const Poly& m) {
  return poly_rem(F, poly_mul(F, a, b), m);
}

// base^e mod m
inline Poly poly_powmod(const PrimeField& F, Poly base, u64 e, const Poly& m) {
  Poly r{F.one()};
  base = poly_rem(F, std::move(base), m);
  while (e) {
    if (e & 1) r = poly_mulmod(F, r, base, m);
    base = poly_mulmod(F, base, base, m);
    e >>= 1;
  }
  return r;
}

inline Poly poly_gcd(const PrimeField& F, Poly a, Poly b) {
  while (poly_deg(b) >= 0) {
    Poly r = poly_rem(F, a, b);
    a = std::move(b);
    b = std::move(r);
  }
  // monic-normalize
  int d = poly_deg(a);
  if (d >= 0) a = poly_scale(F, a, F.inv(a[d]));
  return a;
}

// Number of distinct roots of f in F_p: deg gcd(x^p - x, f).
inline int poly_root_count(const PrimeField& F, const Poly& f) {
  if (poly_deg(f) <= 0) return 0;
  Poly x{F.zero(), F.one()};
  Poly xp = poly_powmod(F, x, F.modulus(), f);
  Poly diff = poly_sub(F, xp, x);
  return poly_deg(poly_gcd(F, f, diff));
}

// f splits into distinct linear factors over F_p  <=>  x^p == x (mod f).
inline bool poly_splits_completely(const PrimeField& F, const Poly& f) {
  if (poly_deg(f) < 1) return true;
  Poly x{F.zero(), F.one()};
  Poly xp = poly_powmod(F, x, F.modulus(), f);
  return poly_deg(poly_sub(F, xp, x)) < 0;
}

// --- division polynomials mod p ---------------------------------------
//
// psi_k = W_k(x) * y^(k odd ? 0 : 1) with y^2 = x^3 + A x + B substituted.
// W_k has degree (k^2-1)/2 for odd k and (k^2-4)/2 for even k, leading
// coefficient k in both cases (W_2 = 2).

struct DivisionPolysModP {
  const PrimeField& F;
  Poly f;                      // x^3 + A x + B
  std::vector<Poly> W;         // W[k], filled up to requested index

  DivisionPolysModP(const PrimeField& field, PrimeField::Fp A, PrimeField::Fp B) : F(field) {
    f = Poly{B, A, F.zero(), F.one()};
    Poly f2 = poly_mul(F, f, f);
    PrimeField::Fp c2 = F.from_int(2), c3 = F.from_int(3), c4f = F.from_int(4), c5 = F.from_int(5);
    PrimeField::Fp A2 = F.mul(A, A), A3 = F.mul(A2, A), B2 = F.mul(B, B), AB = F.mul(A, B);
    W.resize(5);
    W[0] = Poly{};            // 0
    W[1] = Poly{F.one()};
    W[2] = Poly{c2};
    // 3x^4 + 6Ax^2 + 12Bx - A^2
    W[3] = Poly{F.neg(A2), F.mul(F.from_int(12), B), F.mul(F.from_int(6), A), F.zero(), c3};
    // 4(x^6 + 5Ax^4 + 20Bx^3 - 5A^2x^2 - 4ABx - 8B^2 - A^3)
    Poly w4{F.sub(F.neg(F.mul(F.from_int(8), B2)), A3),
            F.neg(F.mul(c4f, AB)),
            F.neg(F.mul(c5, A2)),
            F.mul(F.from_int(20), B),
            F.mul(c5, A),
            F.zero(),
            F.one()};
    W[4] = poly_scale(F, w4, c4f);
    f2_ = std::move(f2);
  }

  // All recurrence inputs for index j sit strictly below j, so an ascending
  // fill suffices. W[0] is the zero polynomial and is never an input.
  const Poly& get(u32 k) {
    if (k >= W.size()) W.resize(k + 1);
    for (u32 j = 5; j <= k; ++j) {
      if (!W[j].empty()) continue;
      if (j & 1) {
        u32 m = (j - 1) / 2;
        Poly t1 = poly_mul(F, W[m + 2], poly_mul(F, W[m], poly_mul(F, W[m], W[m])));
        Poly t2 = poly_mul(F, W[m - 1], poly_mul(F, W[m + 1], poly_mul(F, W[m + 1], W[m + 1])));
        if (m % 2 == 0) t1 = poly_mul(F, t1, f2_);
        else t2 = poly_mul(F, t2, f2_);
        W[j] = poly_sub(F, std::move(t1), t2);
      } else {
        u32 m = j / 2;
        Poly s1 = poly_mul(F, W[m + 2], poly_mul(F, W[m - 1], W[m - 1]));
        Poly s2 = poly_mul(F, W[m - 2], poly_mul(F, W[m + 1], W[m + 1]));
        Poly t = poly_mul(F, W[m], poly_sub(F, std::move(s1), s2));
        W[j] = poly_scale(F, std::move(t), F.half(F.one()));
      }
    }
    return W[k];
  }

 private:
  Poly f2_;  // f^2
};

// Full rational q-torsion test for a prime power q (q >= 2, p coprime to q
// and to the discriminant). Decides E[q] subset E(F_p) from the reduced
// division polynomial alone: W_q splits into distinct linear factors, every
// root's y-coordinates are rational (f^((p-1)/2) == 1 mod W_q), the cubic
// splits when q is even, and q | p-1 (Weil pairing).
inline bool full_torsion_rational(const PrimeField& F, PrimeField::Fp A, PrimeField::Fp B, u32 q) {
  u64 p = F.modulus();
  if (q % p == 0) throw std::invalid_argument("full_torsion_rational: p divides q");
  if ((p - 1) % q != 0) return false;
  DivisionPolysModP dp(F, A, B);
  if (q % 2 == 0) {
    if (poly_root_count(F, dp.f) != 3) return false;
    if (q == 2) return true;
  }
  const Poly& Wq = dp.get(q);
  if (!poly_splits_completely(F, Wq)) return false;
  // all roots must carry rational y: f(x)^((p-1)/2) == 1 mod W_q.
  // W_q is squarefree and coprime to f here (its roots are not 2-torsion),
  // except for even q where 2-torsion x's live in the cubic, handled above.
  Poly fr = poly_powmod(F, dp.f, (p - 1) / 2, Wq);
  Poly one{F.one()};
  return poly_deg(poly_sub(F, fr, one)) < 0;
}

}  // namespace cmavg

#endif  // CMAVG_POLY_FP_HPP
