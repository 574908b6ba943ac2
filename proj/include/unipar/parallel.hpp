#pragma once

// Deterministic chunked reduction. The chunk partition is fixed and partial
// results are combined in chunk order, so the result is bit-identical for any
// thread count. Thread count comes from UNIPAR_THREADS (default 1).

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace unipar {

inline int parallel_thread_count() {
  if (const char* env = std::getenv("UNIPAR_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

// fn(lo, hi) -> partial value over [lo, hi); combine folds in chunk order.
template <class T, class ChunkFn, class Combine>
T chunked_reduce(int64_t n, T init, ChunkFn fn, Combine combine, int chunks = 64) {
  if (n <= 0) return init;
  if (chunks > n) chunks = static_cast<int>(n);
  std::vector<T> partial(chunks, init);
  auto bounds = [&](int c) {
    const int64_t lo = n * c / chunks;
    const int64_t hi = n * (c + 1) / chunks;
    return std::pair<int64_t, int64_t>{lo, hi};
  };
  const int threads = std::min(parallel_thread_count(), chunks);
  if (threads <= 1) {
    for (int c = 0; c < chunks; ++c) {
      auto [lo, hi] = bounds(c);
      partial[c] = fn(lo, hi);
    }
  } else {
    std::atomic<int> next{0};
    auto worker = [&] {
      while (true) {
        const int c = next.fetch_add(1);
        if (c >= chunks) return;
        auto [lo, hi] = bounds(c);
        partial[c] = fn(lo, hi);
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  T acc = init;
  for (int c = 0; c < chunks; ++c) acc = combine(acc, partial[c]);
  return acc;
}

}  // namespace unipar
