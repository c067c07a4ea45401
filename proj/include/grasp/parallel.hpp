#pragma once

// Deterministic fork-join helper. Work items write only to their own output
// slot, and any cross-item reduction is done serially by the caller in index
// order, so results are bit-identical no matter how many threads run.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace grasp {

inline int& default_jobs_ref() {
  static int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return jobs;
}

inline int default_jobs() { return default_jobs_ref(); }
inline void set_default_jobs(int jobs) { default_jobs_ref() = std::max(1, jobs); }

// Runs f(i) for i in [0, n). f must not touch state shared with other indices.
template <class F>
void parallel_for(std::size_t n, F&& f, int jobs = 0) {
  if (jobs <= 0) jobs = default_jobs();
  jobs = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(jobs), n));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(jobs));
  for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace grasp
