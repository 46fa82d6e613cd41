#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace orlat {

/// Runs fn(i) for i in [0, n) on `jobs` worker threads and returns the
/// results in index order. Each replica draws only from its own streams, so
/// the result vector is identical for every job count.
template <typename Result, typename Fn>
std::vector<Result> run_replicas(std::uint64_t n, unsigned jobs, Fn&& fn) {
  std::vector<Result> results(n);
  jobs = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::uint64_t>(n, 1))));
  if (jobs == 1) {
    for (std::uint64_t i = 0; i < n; ++i) results[i] = fn(i);
    return results;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (unsigned w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::uint64_t i = next++; i < n; i = next++) {
        try {
          results[i] = fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace orlat
