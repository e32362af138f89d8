#pragma once

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace sdot {

// Runs fn(chunk_index) for chunk_index in [0, n_chunks). Chunk boundaries are
// fixed by the caller and never depend on the thread count, so per-chunk
// results combined in chunk order are bit-identical for any number of threads.
inline void run_chunks(std::int64_t n_chunks, int n_threads, const std::function<void(std::int64_t)>& fn) {
  if (n_chunks <= 0) return;
  if (n_threads <= 1 || n_chunks == 1) {
    for (std::int64_t c = 0; c < n_chunks; ++c) fn(c);
    return;
  }
  const int workers = static_cast<int>(std::min<std::int64_t>(n_threads, n_chunks));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (std::int64_t c = w; c < n_chunks; c += workers) fn(c);
    });
  }
  for (auto& t : pool) t.join();
}

// Fixed chunking of [0, n) into ranges of at most `chunk` items.
struct ChunkRange {
  std::int64_t begin, end;
};

inline std::int64_t chunk_count(std::int64_t n, std::int64_t chunk) {
  return (n + chunk - 1) / chunk;
}

inline ChunkRange chunk_range(std::int64_t n, std::int64_t chunk, std::int64_t index) {
  const std::int64_t b = index * chunk;
  return {b, std::min(n, b + chunk)};
}

constexpr std::int64_t kDefaultChunk = 8192;

}  // namespace sdot
