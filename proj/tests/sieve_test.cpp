#include "cmavg/sieve.hpp"

#include <gtest/gtest.h>

#include "cmavg/parallel.hpp"
#include "cmavg/presets.hpp"
#include "oracles.hpp"

using namespace cmavg;

TEST(Sieve, TextbookRanges) {
  auto s = sieve_segment(2, 20);
  EXPECT_EQ(s.primes, (std::vector<u64>{2, 3, 5, 7, 11, 13, 17, 19}));
  auto t = sieve_segment(90, 100);
  EXPECT_EQ(t.primes, (std::vector<u64>{97}));
}

TEST(Sieve, MatchesTrialDivisionUpTo1e5) {
  auto expected = oracle::primes_trial_division(100000);
  auto got = primes_in_range(2, 100001, 1 << 14);  // many segments on purpose
  EXPECT_EQ(got, expected);
  EXPECT_EQ(got.size(), 9592u);  // pi(10^5)
}

TEST(Sieve, PiOfOneMillionViaSummedSegments) {
  EXPECT_EQ(prime_count(1000000), 78498u);
}

TEST(Sieve, SegmentUnionIndependentOfSpan) {
  auto a = primes_in_range(2, 300000, 1 << 12);
  auto b = primes_in_range(2, 300000, 1 << 20);
  EXPECT_EQ(a, b);
}

TEST(Sieve, RangeErrors) {
  EXPECT_THROW(sieve_segment(1, 10), std::invalid_argument);
  EXPECT_THROW(sieve_segment(10, 10), std::invalid_argument);
  EXPECT_THROW(sieve_segment(2, (u64{1} << 40) + 1), std::invalid_argument);
  try {
    sieve_segment(2, (u64{1} << 30), u64{1} << 20);
    FAIL() << "expected memory budget error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("segment"), std::string::npos);
  }
}

TEST(GoodPrimes, ConductorAndTwoFiltered) {
  CurveSpec n32 = preset_curve("cm-4");  // N = 32
  PrimeSegment seg;
  seg.lo = 2;
  seg.hi = 8;
  seg.primes = {2, 3, 5, 7};
  EXPECT_EQ(good_primes(seg, n32).primes, (std::vector<u64>{3, 5, 7}));

  CurveSpec n36 = preset_curve("cm-3");  // N = 36: drops 2 and 3
  PrimeSegment seg2;
  seg2.primes = {3, 5};
  EXPECT_EQ(good_primes(seg2, n36).primes, (std::vector<u64>{5}));

  PrimeSegment seg3;
  seg3.primes = {11, 13};
  EXPECT_EQ(good_primes(seg3, n32).primes, (std::vector<u64>{11, 13}));
}

TEST(ParallelMap, IdentityWorkerPreservesOrder) {
  std::vector<u64> primes{3, 5, 7};
  auto out = parallel_map_records(primes, [](u64 p) { return p; }, 4);
  EXPECT_EQ(out, primes);
}

TEST(ParallelMap, SameResultForOneAndEightWorkers) {
  auto primes = primes_in_range(2, 10000);
  auto worker = [](u64 p) { return p * p % 9973; };
  auto a = parallel_map_records(primes, worker, 1, 64);
  auto b = parallel_map_records(primes, worker, 8, 64);
  EXPECT_EQ(a, b);
}

TEST(ParallelMap, FailureNamesTheOffendingPrime) {
  std::vector<u64> primes{3, 5, 7, 11, 13, 17};
  auto worker = [](u64 p) -> u64 {
    if (p == 13) throw std::runtime_error("boom");
    return p;
  };
  try {
    parallel_map_records(primes, worker, 4, 2);
    FAIL() << "expected WorkerError";
  } catch (const WorkerError& e) {
    EXPECT_EQ(e.prime(), 13u);
    EXPECT_NE(std::string(e.what()).find("13"), std::string::npos);
  }
}
