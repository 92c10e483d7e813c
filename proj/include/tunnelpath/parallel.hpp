#pragma once

// Index-ordered parallel map. Results land in index order whatever the
// schedule; the exception from the lowest failing index is rethrown.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <type_traits>
#include <vector>

namespace tunnelpath {

template <class F>
auto parallel_map(std::size_t n, unsigned jobs, F&& f) -> std::vector<std::invoke_result_t<F&, std::size_t>> {
  using R = std::invoke_result_t<F&, std::size_t>;
  static_assert(!std::is_same_v<R, bool>, "parallel_map: std::vector<bool> elements cannot be written concurrently");
  std::vector<R> out(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        out[i] = f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto threads = static_cast<std::size_t>(std::max(1u, jobs));
  if (threads == 1 || n < 2) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(std::min(threads, n));
    for (std::size_t t = 0; t < std::min(threads, n); ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace tunnelpath
