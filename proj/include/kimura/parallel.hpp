#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace kimura {

/// Worker count used when a config asks for 0 (automatic).
inline int default_workers() { return std::max(1U, std::thread::hardware_concurrency()); }

/// Runs body(i) for i in [0, count) on up to `workers` threads. Work is split into
/// contiguous blocks, so results written to slot i are schedule independent. The
/// first exception thrown by any block is rethrown on the calling thread.
template <typename Body>
void parallel_for(std::size_t count, int workers, Body&& body) {
  if (workers <= 0) {
    workers = default_workers();
  }
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      body(i);
    }
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t begin = count * t / threads;
    const std::size_t end = count * (t + 1) / threads;
    pool.emplace_back([&, t, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) {
          body(i);
        }
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) {
    th.join();
  }
  for (auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
}

}  // namespace kimura
