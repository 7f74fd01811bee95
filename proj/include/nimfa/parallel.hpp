#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace nimfa {

/// Worker count: NIMFA_THREADS when set to a positive integer, otherwise
/// the machine's hardware concurrency.
inline int thread_count() {
  if (const char* env = std::getenv("NIMFA_THREADS")) {
    try {
      const int requested = std::stoi(env);
      if (requested > 0) return requested;
    } catch (const std::exception&) {
    }
  }
  return static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
}

/// Calls fn(k) for k in [0, count) on up to thread_count() threads. Work is
/// claimed from a shared counter; the first exception is rethrown.
template <typename Fn>
void parallel_for(long count, Fn&& fn) {
  const long workers = std::min<long>(thread_count(), count);
  if (workers <= 1) {
    for (long k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (long k = next++; k < count; k = next++) {
      try {
        fn(k);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers - 1));
  for (long w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace nimfa
