#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace spats {

/// Hardware concurrency, capped by the SPATS_LAB_THREADS environment variable.
inline int max_threads() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("SPATS_LAB_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) n = static_cast<int>(std::min<long>(n, cap));
  }
  return n;
}

/// Runs fn(i) for i in [0, n). Each index must write only to its own slots, so
/// results are identical whatever the thread count.
template <typename Fn>
void parallel_for(long n, Fn&& fn, int threads = 0) {
  if (n <= 0) return;
  if (threads <= 0) threads = max_threads();
  threads = static_cast<int>(std::min<long>(threads, n));
  if (threads == 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    const long lo = n * t / threads;
    const long hi = n * (t + 1) / threads;
    pool.emplace_back([&, lo, hi] {
      try {
        for (long i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace spats
