#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mixsde {

/// Worker count to use for a request of `requested` (0 = hardware parallelism).
inline unsigned resolve_workers(unsigned requested) noexcept {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Calls fn(i) for every i in [0, count), spread over `workers` threads.
///
/// Work is handed out index by index from a shared counter, so callers that
/// write results into slot i and reduce afterwards in index order get output
/// that does not depend on the worker count.  The first exception thrown by
/// any call is rethrown after all workers stop.
template <typename Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
  workers = std::min<unsigned>(resolve_workers(workers),
                               static_cast<unsigned>(std::max<std::size_t>(count, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      if (stop.load(std::memory_order_relaxed)) return;
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        stop = true;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// Pairwise (tree) sum of v in index order; the association pattern depends
/// only on v.size().
template <typename T>
T pairwise_sum(const T* v, std::size_t n) {
  if (n == 0) return T(0);
  if (n == 1) return v[0];
  const std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

template <typename T>
T pairwise_sum(const std::vector<T>& v) {
  return pairwise_sum(v.data(), v.size());
}

}  // namespace mixsde
