#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace rws {

/// Bad user-facing configuration (invalid parameter combination, mismatched
/// calibration, unreadable file). The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure (non-finite input, solver breakdown). CLI exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Hypothesis : std::uint8_t { null = 0, rws = 1, proxy = 2 };

std::string to_string(Hypothesis h);
Hypothesis hypothesis_from_string(const std::string& s);

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of replicate `index` in a batch; a pure function of its arguments so
/// that results do not depend on scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                    Hypothesis tag) noexcept {
  std::uint64_t h = mix64(master);
  h = mix64(h ^ (index + 0x632be59bd9b4e019ULL));
  h = mix64(h ^ (static_cast<std::uint64_t>(tag) + 1));
  return h;
}

/// Same as above with an extra stream id (e.g. repetition number).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t index, Hypothesis tag) noexcept {
  return derive_seed(mix64(master ^ mix64(stream + 0x2545f4914f6cdd1dULL)), index, tag);
}

struct ParallelOptions {
  unsigned threads = 0;  // 0: hardware concurrency

  unsigned resolved() const {
    if (threads != 0) return threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
  }
};

/// Runs body(i) for i in [0, count). Each index is processed exactly once;
/// callers write into per-index slots so the result is independent of the
/// thread count. The first exception thrown by any worker is rethrown.
inline void parallel_for(std::size_t count, const ParallelOptions& opts,
                         const std::function<void(std::size_t)>& body) {
  const unsigned nthreads =
      static_cast<unsigned>(std::min<std::size_t>(opts.resolved(), count));
  if (nthreads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

/// (log n)^{(log log n)^2} with natural logarithms; the plus-variant threshold.
double tilde_L(std::int64_t n);

/// (log n)^{log log n}.
double L_n(std::int64_t n);

/// Tracy-Widom test threshold (3 log n)^{2/3}.
double tw_threshold(std::int64_t n);

}  // namespace rws
