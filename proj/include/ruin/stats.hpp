#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace ruin {

// Shared result type for every Monte-Carlo estimator in the project.
struct SimulationEstimate {
  double value = std::numeric_limits<double>::quiet_NaN();
  double std_error = std::numeric_limits<double>::quiet_NaN();
  std::size_t n = 0;
  double ci_lo = std::numeric_limits<double>::quiet_NaN();
  double ci_hi = std::numeric_limits<double>::quiet_NaN();
  std::string method;
  std::size_t grid_m = 0;
  std::uint64_t seed = 0;
  double ess = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::string> flags;

  bool has_flag(const std::string& f) const {
    for (const auto& g : flags)
      if (g == f) return true;
    return false;
  }
};

// Plain running sums for one chunk; merged sequentially in chunk order so the
// reduction is independent of thread scheduling.
struct MomentAccumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t n = 0;

  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++n;
  }
  void merge(const MomentAccumulator& o) {
    sum += o.sum;
    sum_sq += o.sum_sq;
    n += o.n;
  }
  double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
  double variance() const {
    if (n < 2) return 0.0;
    const double m = mean();
    const double v = (sum_sq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1);
    return v > 0.0 ? v : 0.0;
  }
  double std_error() const { return n ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

// log(sum of exp(x_i)) with streaming rescaling; avoids overflow of exp(sup)
// accumulation in the constants estimators.
struct LogSumExp {
  double max_x = -std::numeric_limits<double>::infinity();
  double sum_scaled = 0.0;  // sum of exp(x_i - max_x)
  std::size_t n = 0;

  void add(double x) {
    if (n == 0 || x > max_x) {
      sum_scaled = sum_scaled * std::exp(max_x - x) + 1.0;
      max_x = x;
    } else {
      sum_scaled += std::exp(x - max_x);
    }
    ++n;
  }
  void merge(const LogSumExp& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    if (o.max_x > max_x) {
      sum_scaled = sum_scaled * std::exp(max_x - o.max_x) + o.sum_scaled;
      max_x = o.max_x;
    } else {
      sum_scaled += o.sum_scaled * std::exp(o.max_x - max_x);
    }
    n += o.n;
  }
  double log_sum() const {
    return n ? max_x + std::log(sum_scaled) : -std::numeric_limits<double>::infinity();
  }
  // mean of exp(x_i); safe as long as the mean itself is representable.
  double mean_exp() const {
    return n ? std::exp(log_sum() - std::log(static_cast<double>(n))) : 0.0;
  }
};

inline void binomial_estimate(SimulationEstimate& est, std::size_t hits, std::size_t n) {
  const double p = n ? static_cast<double>(hits) / static_cast<double>(n) : 0.0;
  est.value = p;
  est.n = n;
  est.std_error = n ? std::sqrt(p * (1.0 - p) / static_cast<double>(n)) : 0.0;
  est.ci_lo = p - 1.959963984540054 * est.std_error;
  est.ci_hi = p + 1.959963984540054 * est.std_error;
}

// Delete-one-chunk jackknife over per-chunk statistics. `stat` maps the
// leave-one-out pooled accumulators to the estimator value.
template <typename Chunk, typename Stat>
double jackknife_std_error(const std::vector<Chunk>& chunks, const Stat& stat) {
  const std::size_t c = chunks.size();
  if (c < 2) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> loo(c);
  for (std::size_t i = 0; i < c; ++i) loo[i] = stat(i);
  double mean = 0.0;
  for (double v : loo) mean += v;
  mean /= static_cast<double>(c);
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  return std::sqrt(ss * static_cast<double>(c - 1) / static_cast<double>(c));
}

}  // namespace ruin
