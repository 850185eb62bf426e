#pragma once

// Minimal fork-join helper.  Work items must be independent; results are
// written by index, so output order never depends on scheduling.

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace hamiter {

/// Worker count used by parallel_for; 1 by default, set from --jobs.
int jobs();
void set_jobs(int n);

template <class Fn>
void parallel_for(long count, Fn&& fn) {
  const int workers = static_cast<int>(std::min<long>(jobs(), count));
  if (workers <= 1) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (long i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace hamiter
