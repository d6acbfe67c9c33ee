#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace nlss {

// Process-wide default worker count, set once by the CLI --threads flag.
inline std::atomic<int>& thread_count_storage() {
  static std::atomic<int> count{1};
  return count;
}

inline int default_threads() { return thread_count_storage().load(); }
inline void set_default_threads(int k) {
  thread_count_storage().store(k < 1 ? 1 : k);
}

// Static range partition. Each worker receives a contiguous [lo, hi) block,
// so any per-index output is computed by exactly one thread and the result
// is independent of the thread count.
inline void parallel_for(std::int64_t n, int threads,
                         const std::function<void(std::int64_t, std::int64_t)>& body) {
  if (n <= 0) return;
  if (threads <= 1 || n < 256) {
    body(0, n);
    return;
  }
  int workers = threads;
  if (static_cast<std::int64_t>(workers) > n) workers = static_cast<int>(n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::int64_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    std::int64_t lo = w * chunk;
    std::int64_t hi = lo + chunk < n ? lo + chunk : n;
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace nlss
