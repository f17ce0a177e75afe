#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace pspline {

/// Worker count: explicit request, else the PSPLINE_THREADS environment
/// variable, else all cores. The environment variable wins over a request
/// so batch runs can be throttled without touching call sites.
inline unsigned resolve_threads(unsigned requested = 0) {
  if (const char* env = std::getenv("PSPLINE_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<unsigned>(n);
  }
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

/// Run fn(i) for i in [0, n) on up to `threads` workers. Exceptions from
/// workers are rethrown on the calling thread (first one wins).
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                         unsigned threads = 0) {
  threads = resolve_threads(threads);
  if (n == 0) return;
  if (threads <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  std::atomic<std::size_t> next{0};
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      try {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace pspline
