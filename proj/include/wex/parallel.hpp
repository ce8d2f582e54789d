#pragma once
#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

namespace wex {

// Worker count for grid fills, from WEX_THREADS (default 1).  All parallel
// loops write disjoint outputs, so results do not depend on this value.
inline int thread_count() {
  const char* env = std::getenv("WEX_THREADS");
  if (!env) return 1;
  int n = std::atoi(env);
  if (n < 1) return 1;
  unsigned hw = std::thread::hardware_concurrency();
  if (hw > 0 && n > static_cast<int>(hw)) n = static_cast<int>(hw);
  return n;
}

template <typename F>
void parallel_for(std::int64_t n, F&& fn) {
  int workers = thread_count();
  if (workers <= 1 || n < 1024) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::int64_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    std::int64_t lo = w * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::int64_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace wex
