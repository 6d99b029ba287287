#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace pencil {

/// Thread cap: PENCIL_THREADS env var, else hardware concurrency.
inline int max_threads() {
  if (const char* env = std::getenv("PENCIL_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Runs fn(i) for i in [0, n).  Results must be written to per-index slots;
/// the caller combines them in index order so the outcome is deterministic.
inline void parallel_for(int n, const std::function<void(int)>& fn) {
  int threads = std::min(max_threads(), n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t]() {
      for (int i = t; i < n; i += threads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

} // namespace pencil
