#ifndef CMAVG_PARALLEL_HPP
#define CMAVG_PARALLEL_HPP

// Deterministic parallel map over a prime list: workers pull chunks from an
// atomic counter, results are stitched back in input order, so the output is
// identical for 1 worker and W workers.

#include <atomic>
#include <cstdint>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "cmavg/modmath.hpp"

namespace cmavg {

class WorkerError : public std::runtime_error {
 public:
  WorkerError(u64 p, const std::string& what)
      : std::runtime_error("worker failed at p=" + std::to_string(p) + ": " + what), p_(p) {}
  u64 prime() const { return p_; }

 private:
  u64 p_;
};

template <class Worker>
auto parallel_map_records(const std::vector<u64>& primes, Worker worker, unsigned n_workers,
                          std::size_t chunk_size = 256)
    -> std::vector<decltype(worker(u64{}))> {
  using R = decltype(worker(u64{}));
  if (n_workers == 0) n_workers = 1;
  if (chunk_size == 0) chunk_size = 1;
  const std::size_t n_chunks = (primes.size() + chunk_size - 1) / chunk_size;
  std::vector<std::vector<R>> results(n_chunks);

  struct Failure {
    u64 p;
    std::string what;
  };
  std::vector<std::vector<Failure>> failures(n_chunks);

  std::atomic<std::size_t> next{0};
  auto run = [&]() {
    for (;;) {
      std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      std::size_t a = c * chunk_size;
      std::size_t b = std::min(primes.size(), a + chunk_size);
      auto& out = results[c];
      out.reserve(b - a);
      for (std::size_t i = a; i < b; ++i) {
        try {
          out.push_back(worker(primes[i]));
        } catch (const std::exception& e) {
          failures[c].push_back({primes[i], e.what()});
          return;  // abandon the chunk; the error is reported below
        }
      }
    }
  };

  if (n_workers == 1 || primes.size() <= chunk_size) {
    run();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
  }

  for (const auto& fs : failures)
    for (const auto& f : fs) throw WorkerError(f.p, f.what);

  std::vector<R> merged;
  merged.reserve(primes.size());
  for (auto& part : results)
    for (auto& r : part) merged.push_back(std::move(r));
  return merged;
}

}  // namespace cmavg

#endif  // CMAVG_PARALLEL_HPP
