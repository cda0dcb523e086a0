#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ruin {

// SplitMix64 finalizer; used to derive independent stream seeds from
// (user seed, stream id) so that replicate streams never depend on how
// work is scheduled across threads.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// One RNG stream = one replicate chunk. Streams with distinct (seed, stream)
// pairs are statistically independent for simulation purposes.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream)
      : engine_(splitmix64(splitmix64(seed) ^ (stream * 0x9e3779b97f4a7c15ULL))) {}

  // [0,1); 53-bit resolution, independent of the standard library's
  // distribution implementations.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() { return normal_(engine_); }

  double exponential() {
    // 1 - uniform() is in (0,1], so the log is finite.
    return -std::log(1.0 - uniform());
  }

  // Knuth multiplication method, split for large means so the product never
  // underflows. Fine for the arrival counts used here (mean << 1e3).
  std::uint64_t poisson(double mean) {
    std::uint64_t total = 0;
    while (mean > 500.0) {
      total += poisson_block(500.0);
      mean -= 500.0;
    }
    return total + poisson_block(mean);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t poisson_block(double mean) {
    if (mean <= 0.0) return 0;
    const double limit = std::exp(-mean);
    double prod = 1.0;
    std::uint64_t k = 0;
    do {
      prod *= uniform();
      ++k;
    } while (prod > limit);
    return k - 1;
  }

  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace ruin
