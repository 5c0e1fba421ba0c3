#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace gblobs {

/// Resolves a thread-count argument: n >= 1 is taken literally, n <= 0 means
/// hardware concurrency (at least 1).
inline int resolve_threads(int n) {
  if (n >= 1) return n;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(chunk_index, begin, end) over [0, count) split into contiguous
/// chunks, one per worker. Chunk boundaries depend only on (count, threads),
/// so callers that merge per-chunk results in chunk order stay deterministic.
/// With threads == 1 everything runs inline on the calling thread.
template <typename Fn>
void parallel_chunks(std::size_t count, int threads, Fn&& fn) {
  const int n = resolve_threads(threads);
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(n), count == 0 ? 1 : count);
  if (workers <= 1) {
    fn(std::size_t{0}, std::size_t{0}, count);
    return;
  }
  const std::size_t chunk = (count + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, w, begin, end] { fn(w, begin, end); });
  }
  for (auto& t : pool) t.join();
}

/// Number of chunks parallel_chunks() will use for (count, threads).
inline std::size_t chunk_count(std::size_t count, int threads) {
  const int n = resolve_threads(threads);
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(n), count == 0 ? 1 : count);
  if (workers <= 1) return 1;
  const std::size_t chunk = (count + workers - 1) / workers;
  return (count + chunk - 1) / chunk;
}

}  // namespace gblobs
