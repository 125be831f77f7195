#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace nlspec {

/// Worker count: hardware concurrency, capped (never raised) by the
/// NLSPEC_THREADS environment variable.
inline int worker_count() {
  const unsigned hw = std::thread::hardware_concurrency();
  long n = hw ? static_cast<long>(hw) : 1;
  if (const char* env = std::getenv("NLSPEC_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) n = std::min(n, cap);
  }
  return static_cast<int>(std::max(1L, n));
}

/// Runs fn(chunk, begin, end) over a fixed partition of [0, count) into
/// `chunks` ranges. The partition is independent of the worker count, so
/// per-chunk accumulators can be merged in chunk order deterministically.
inline void parallel_chunks(int count, int chunks,
                            const std::function<void(int, int, int)>& fn) {
  if (count <= 0) return;
  chunks = std::max(1, std::min(chunks, count));
  auto bound = [&](int c) {
    return static_cast<int>(static_cast<long long>(count) * c / chunks);
  };
  const int workers = std::min(worker_count(), chunks);
  if (workers == 1) {
    for (int c = 0; c < chunks; ++c) fn(c, bound(c), bound(c + 1));
    return;
  }
  std::atomic<int> next{0};
  auto run = [&] {
    for (int c; (c = next.fetch_add(1)) < chunks;) fn(c, bound(c), bound(c + 1));
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int t = 0; t < workers - 1; ++t) pool.emplace_back(run);
  run();
  for (auto& th : pool) th.join();
}

}  // namespace nlspec
