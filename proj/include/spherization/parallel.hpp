// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace spherization {

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Work items must write
/// only to their own output slots; the caller reduces in index order, so
/// results do not depend on the worker count. If several items throw, the
/// exception of the smallest index is rethrown.
template <class Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  const std::size_t nw = std::min<std::size_t>(std::max(1, workers), n);
  if (nw <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t err_index = n;
  std::exception_ptr err;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < err_index) {
          err_index = i;
          err = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(nw - 1);
  for (std::size_t w = 1; w < nw; ++w) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace spherization
