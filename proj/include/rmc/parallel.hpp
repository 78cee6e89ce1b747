// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace rmc {

/// Worker count: RMC_THREADS when set to a positive integer, otherwise the
/// machine's hardware concurrency.
inline unsigned default_thread_count() {
  if (const char* env = std::getenv("RMC_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs task(i) for i in [0, tasks) on up to `threads` workers. Tasks are
/// claimed in index order; the first exception thrown stops further claims
/// and is rethrown on the calling thread.
template <class Task>
void parallel_for(std::size_t tasks, unsigned threads, Task&& task) {
  if (threads == 0) threads = default_thread_count();
  const auto workers = static_cast<unsigned>(
      std::min<std::size_t>(threads, std::max<std::size_t>(tasks, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < tasks; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const auto i = next.fetch_add(1);
      if (i >= tasks) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace rmc
