#pragma once

// Fixed-size worker pool for independent per-point jobs.  Results come back
// in index order; the first failing index rethrows its exception.

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <optional>
#include <thread>
#include <vector>

namespace hfq::cli {

template <typename R>
std::vector<R> parallel_map(int count, int threads, const std::function<R(int)>& job) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::max(1, std::min(threads, count));
  std::vector<std::optional<R>> out(count);
  std::vector<std::exception_ptr> err(count);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        out[i] = job(i);
      } catch (...) {
        err[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  std::vector<R> res;
  res.reserve(count);
  for (int i = 0; i < count; ++i) {
    if (err[i]) std::rethrow_exception(err[i]);
    res.push_back(std::move(*out[i]));
  }
  return res;
}

}  // namespace hfq::cli
