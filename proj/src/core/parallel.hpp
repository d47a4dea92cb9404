#pragma once

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace nlbox {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Splits [begin, end) into contiguous chunks, runs `work(chunk_index, b, e)`
// on worker threads, and returns per-chunk results in chunk order so that the
// caller's reduction is deterministic regardless of thread count.
template <class T>
std::vector<T> parallel_chunks(std::uint64_t begin, std::uint64_t end, int threads,
                               const std::function<T(std::size_t, std::uint64_t, std::uint64_t)>& work) {
  const std::uint64_t total = end > begin ? end - begin : 0;
  int nthreads = resolve_threads(threads);
  if (total < static_cast<std::uint64_t>(nthreads)) nthreads = total == 0 ? 1 : static_cast<int>(total);

  std::vector<T> results(static_cast<std::size_t>(nthreads));
  if (nthreads <= 1) {
    results[0] = work(0, begin, end);
    return results;
  }

  const std::uint64_t chunk = total / nthreads;
  const std::uint64_t extra = total % nthreads;
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  std::uint64_t lo = begin;
  for (int t = 0; t < nthreads; ++t) {
    const std::uint64_t hi = lo + chunk + (static_cast<std::uint64_t>(t) < extra ? 1 : 0);
    pool.emplace_back([&, t, lo, hi] { results[static_cast<std::size_t>(t)] = work(t, lo, hi); });
    lo = hi;
  }
  for (auto& th : pool) th.join();
  return results;
}

}  // namespace nlbox
