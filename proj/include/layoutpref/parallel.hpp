#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace layoutpref {

/// Calls fn(i) for every i in [0, n) on up to `threads` workers. Work items
/// must write only to their own slot so results do not depend on scheduling.
/// The exception of the lowest failing index is rethrown after all workers
/// have stopped.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const auto workers =
      static_cast<std::size_t>(std::clamp<std::size_t>(threads < 1 ? 1 : threads, 1, n == 0 ? 1 : n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (std::size_t i = next++; i < n && !failed.load(); i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace layoutpref
