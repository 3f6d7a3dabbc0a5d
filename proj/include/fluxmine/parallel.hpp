#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fluxmine {

namespace detail {
inline std::atomic<unsigned>& jobs_setting() {
  static std::atomic<unsigned> jobs{0};
  return jobs;
}
}  // namespace detail

/// Process-wide bound on worker threads for data-parallel phases.
/// 0 means "use the available hardware parallelism".
inline void set_parallelism(unsigned jobs) { detail::jobs_setting().store(jobs); }

inline unsigned parallelism() {
  unsigned jobs = detail::jobs_setting().load();
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  return jobs;
}

/// Runs fn(i) for i in [0, n). Each index is visited exactly once; callers
/// write only to per-index slots, so results do not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const unsigned jobs = std::min<std::size_t>(parallelism(), n);
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(jobs);
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace fluxmine
