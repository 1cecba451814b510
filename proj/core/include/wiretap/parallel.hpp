#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace wiretap {

// Worker count: hardware concurrency, capped by WIRETAP_LAB_THREADS when set.
inline int recommended_threads() {
  unsigned hw = std::thread::hardware_concurrency();
  int n = hw == 0 ? 1 : static_cast<int>(hw);
  if (const char* env = std::getenv("WIRETAP_LAB_THREADS")) {
    int cap = std::atoi(env);
    if (cap >= 1 && cap < n) n = cap;
  }
  return n;
}

// Static block partition of [0, count); each index runs exactly once and
// callers must only write disjoint state per index, so results never depend
// on the worker count.
inline void parallel_for(int count, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  int workers = recommended_threads();
  if (workers <= 1 || count == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  if (workers > count) workers = count;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  int chunk = (count + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    int begin = w * chunk;
    int end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([begin, end, &fn] {
      for (int i = begin; i < end; ++i) fn(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace wiretap
