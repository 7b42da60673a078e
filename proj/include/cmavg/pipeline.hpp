#ifndef CMAVG_PIPELINE_HPP
#define CMAVG_PIPELINE_HPP

// Drives the per-prime computation over a sieved range: segments, good-prime
// filtering, deterministic parallel map.

#include <vector>

#include "cmavg/curve.hpp"
#include "cmavg/parallel.hpp"
#include "cmavg/sieve.hpp"

namespace cmavg {

struct PipelineOptions {
  unsigned workers = 1;
  u64 segment_span = kDefaultSegmentSpan;
  RecordOptions record;
};

// Records for every good prime in (from_exclusive, to_inclusive], ascending.
inline std::vector<PrimeRecord> compute_records(const CurveSpec& curve, u64 from_exclusive, u64 to_inclusive,
                                                const PipelineOptions& opts = {}) {
  std::vector<PrimeRecord> out;
  if (to_inclusive <= from_exclusive) return out;
  u64 lo = std::max<u64>(2, from_exclusive + 1);
  for (u64 a = lo; a <= to_inclusive;) {
    u64 b = std::min(to_inclusive, a + opts.segment_span - 1);
    PrimeSegment seg = sieve_segment(a, b + 1, std::max(opts.segment_span, u64{1} << 16));
    PrimeSegment good = good_primes(seg, curve);
    auto recs = parallel_map_records(
        good.primes, [&](u64 p) { return compute_record(curve, p, opts.record); }, opts.workers);
    out.insert(out.end(), recs.begin(), recs.end());
    a = b + 1;
  }
  return out;
}

}  // namespace cmavg

#endif  // CMAVG_PIPELINE_HPP
