#pragma once

#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

#include "hrmt/rng.hpp"

namespace hrmt {

/// Number of worker threads to use: explicit request, else the environment
/// override, else the hardware concurrency (at least 1).
unsigned resolve_workers(unsigned requested);

/// Runs `count` independent realizations on `workers` threads. Realization k
/// receives its own RngStream(master_seed, stream_base + k) and its result
/// lands in slot k, so the returned vector is identical for every worker
/// count. Work is handed out through a shared atomic counter. Exceptions are
/// captured and rethrown on the calling thread.
template <typename Record, typename Fn>
std::vector<Record> parallel_realizations(std::uint64_t count,
                                          std::uint64_t master_seed,
                                          std::uint64_t stream_base,
                                          unsigned workers, Fn&& fn) {
  std::vector<Record> results(count);
  if (count == 0) return results;
  workers = resolve_workers(workers);
  if (workers > count) workers = static_cast<unsigned>(count);

  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};

  auto body = [&]() {
    for (;;) {
      const std::uint64_t k = next.fetch_add(1);
      if (k >= count || failed.load()) break;
      try {
        RngStream rng(master_seed, stream_base + k);
        results[k] = fn(k, rng);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
        break;
      }
    }
  };

  if (workers <= 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& th : pool) th.join();
  }
  if (failed.load() && error) std::rethrow_exception(error);
  return results;
}

}  // namespace hrmt
