#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace find {

namespace detail {
inline std::atomic<std::size_t>& thread_cap() {
  static std::atomic<std::size_t> cap{0};
  return cap;
}
}  // namespace detail

/// 0 means hardware concurrency.
inline void set_threads(std::size_t n) { detail::thread_cap() = n; }

inline std::size_t thread_count() {
  const std::size_t cap = detail::thread_cap();
  if (cap > 0) return cap;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Calls fn(i) for i in [0, n). Work is handed out in index order; callers
/// write results into pre-sized slots so output never depends on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min(thread_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t t = 0; t + 1 < workers; ++t) pool.emplace_back(body);
  body();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace find
