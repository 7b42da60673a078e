#ifndef CMAVG_SIEVE_HPP
#define CMAVG_SIEVE_HPP

// Segmented sieve of Eratosthenes (odd-only bitmap). Segments are the unit
// of parallel work in the pipeline; the default span keeps x = 10^8 runs in
// bounded memory.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmavg/modmath.hpp"

namespace cmavg {

struct PrimeSegment {
  u64 lo = 0;  // inclusive
  u64 hi = 0;  // exclusive
  std::vector<u64> primes;  // ascending, exactly the primes in [lo, hi)
};

inline constexpr u64 kDefaultSegmentSpan = u64{1} << 22;
inline constexpr u64 kMaxSegmentSpan = u64{1} << 28;
inline constexpr u64 kSieveLimit = u64{1} << 40;

// Simple sieve up to n inclusive.
inline std::vector<u64> small_primes_upto(u64 n) {
  std::vector<u64> out;
  if (n < 2) return out;
  std::vector<bool> comp(n + 1, false);
  for (u64 i = 2; i * i <= n; ++i)
    if (!comp[i])
      for (u64 j = i * i; j <= n; j += i) comp[j] = true;
  for (u64 i = 2; i <= n; ++i)
    if (!comp[i]) out.push_back(i);
  return out;
}

inline PrimeSegment sieve_segment(u64 lo, u64 hi, u64 max_span = kMaxSegmentSpan) {
  if (lo < 2 || hi <= lo) throw std::invalid_argument("sieve_segment: need 2 <= lo < hi");
  if (hi > kSieveLimit) throw std::invalid_argument("sieve_segment: hi exceeds 2^40");
  if (hi - lo > max_span)
    throw std::runtime_error("sieve_segment: span " + std::to_string(hi - lo) +
                             " exceeds the memory budget; split into segments of at most " +
                             std::to_string(max_span) + " (e.g. --segment " +
                             std::to_string(kDefaultSegmentSpan) + ")");
  PrimeSegment seg;
  seg.lo = lo;
  seg.hi = hi;
  if (lo <= 2 && 2 < hi) seg.primes.push_back(2);
  // odd-only bitmap over [lo, hi)
  u64 first = lo | 1;
  if (first < 3) first = 3;
  if (first >= hi) return seg;
  u64 count = (hi - first + 1) / 2;  // odds in [first, hi)
  std::vector<bool> comp(count, false);
  std::vector<u64> base = small_primes_upto(isqrt_u64(hi - 1));
  for (u64 q : base) {
    if (q == 2) continue;
    u64 start = ((first + q - 1) / q) * q;
    if (start < q * q) start = q * q;
    if ((start & 1) == 0) start += q;
    for (u64 m = start; m < hi; m += 2 * q) comp[(m - first) / 2] = true;
  }
  // base primes inside the window survive: marking starts at q*q
  for (u64 i = 0; i < count; ++i)
    if (!comp[i]) seg.primes.push_back(first + 2 * i);
  return seg;
}

// Splits [lo, hi) into spans of at most `span` and concatenates the primes.
inline std::vector<u64> primes_in_range(u64 lo, u64 hi, u64 span = kDefaultSegmentSpan) {
  std::vector<u64> out;
  for (u64 a = lo; a < hi;) {
    u64 b = std::min(hi, a + span);
    PrimeSegment s = sieve_segment(a, b, std::max(span, u64{1} << 16));
    out.insert(out.end(), s.primes.begin(), s.primes.end());
    a = b;
  }
  return out;
}

inline u64 prime_count(u64 x, u64 span = kDefaultSegmentSpan) {
  if (x < 2) return 0;
  u64 n = 0;
  for (u64 a = 2; a <= x;) {
    u64 b = std::min(x + 1, a + span);
    n += sieve_segment(a, b, std::max(span, u64{1} << 16)).primes.size();
    a = b;
  }
  return n;
}

// Removes the primes of bad reduction (and p = 2, which the artifact
// excludes globally). Curve must expose is_bad_prime(p).
template <class Curve>
PrimeSegment good_primes(const PrimeSegment& seg, const Curve& curve) {
  PrimeSegment out;
  out.lo = seg.lo;
  out.hi = seg.hi;
  out.primes.reserve(seg.primes.size());
  for (u64 p : seg.primes)
    if (!curve.is_bad_prime(p)) out.primes.push_back(p);
  return out;
}

}  // namespace cmavg

#endif  // CMAVG_SIEVE_HPP
