#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

namespace wrsf {

// Run fn(i) for i in [0, count) on up to `workers` threads. Callers write
// results into preallocated index-addressed slots, so the outcome does not
// depend on which thread claims which index. The first exception thrown by
// any worker is rethrown on the calling thread after all workers join.
inline void parallel_for_index(int count, int workers, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  if (workers < 1) throw std::invalid_argument("parallel_for_index: workers must be >= 1");
  const int n_threads = std::min(workers, count);
  if (n_threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }

  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_lock;
  auto worker = [&]() {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> guard(error_lock);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace wrsf
