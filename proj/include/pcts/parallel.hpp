#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace pcts {

/// Number of worker threads to use for a request of `threads` (0 = all
/// hardware threads).
inline int resolve_threads(int threads) {
  if (threads > 0) return threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(begin, end) over a static partition of [0, n). Each index is
/// visited exactly once and the partition never affects results as long as
/// body writes only to slots it owns.
template <typename Body>
void parallel_for(long n, int threads, Body&& body) {
  const int workers = static_cast<int>(
      std::min<long>(resolve_threads(threads), std::max<long>(n, 1)));
  if (workers <= 1) {
    body(0L, n);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  const long chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const long begin = std::min(n, w * chunk);
    const long end = std::min(n, begin + chunk);
    pool.emplace_back([&, w, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace pcts
