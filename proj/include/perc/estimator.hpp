#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

// Trial execution with per-trial RNG streams. Results land in a
// trial-indexed buffer and are reduced serially, so output is identical
// for any thread count.

namespace perc {

template <typename T, typename F>
std::vector<T> run_trials(uint64_t trials, int threads, F&& per_trial) {
  std::vector<T> results(trials);
  if (threads <= 1) {
    for (uint64_t t = 0; t < trials; ++t) results[t] = per_trial(t);
    return results;
  }
  std::atomic<uint64_t> next{0};
  const uint64_t chunk = 256;
  auto worker = [&]() {
    for (;;) {
      uint64_t begin = next.fetch_add(chunk);
      if (begin >= trials) return;
      uint64_t end = std::min(begin + chunk, trials);
      for (uint64_t t = begin; t < end; ++t) results[t] = per_trial(t);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return results;
}

struct EstimatorResult {
  uint64_t trials{0};
  uint64_t accepted{0};  // trials meeting the conditioning event
  uint64_t hits{0};
  double phat{0.0};
  double stderr_{0.0};
  uint64_t seed{0};
};

inline double binomial_stderr(double phat, uint64_t n) {
  if (n == 0) return 0.0;
  return std::sqrt(phat * (1.0 - phat) / static_cast<double>(n));
}

struct MeanAccumulator {
  uint64_t count{0};
  double sum{0.0};
  double sum_sq{0.0};
  void add(double x) {
    ++count;
    sum += x;
    sum_sq += x * x;
  }
  double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
  double stderr_() const {
    if (count < 2) return 0.0;
    double m = mean();
    double var = (sum_sq - static_cast<double>(count) * m * m) /
                 static_cast<double>(count - 1);
    return std::sqrt(std::max(var, 0.0) / static_cast<double>(count));
  }
};

}  // namespace perc
