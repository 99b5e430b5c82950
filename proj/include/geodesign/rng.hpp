#ifndef GEODESIGN_RNG_HPP
#define GEODESIGN_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace geodesign {

namespace detail {

// splitmix64: used only to expand / mix seeds, never as the main generator.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

// Deterministic random stream. Wraps mt19937_64 but generates variates with
// explicit transforms instead of std::*_distribution, whose output is
// implementation-defined; identical seeds therefore give identical draws on
// every platform. Substreams are derived by seed mixing, so replicates can
// run concurrently and in any order without changing results.
class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(detail::splitmix64(seed)) {}

  std::uint64_t seed() const { return seed_; }

  // Independent stream for sub-task `index` (replicate, cell, ...).
  RandomStream substream(std::uint64_t index) const {
    return RandomStream(detail::splitmix64(seed_ ^ detail::splitmix64(index + 0x517CC1B727220A95ULL)));
  }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform on (0, 1]; safe as a log() argument.
  double uniform_pos() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }

  // Standard normal via Box-Muller (fixed two-draw consumption).
  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Uniform integer in [0, bound), bound >= 1. Rejection keeps it unbiased.
  std::uint64_t uniform_index(std::uint64_t bound) {
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  // Binomial(trials, p) as a Bernoulli sum; trials stays small here.
  long binomial(long trials, double p) {
    long count = 0;
    for (long i = 0; i < trials; ++i) {
      if (uniform() < p) ++count;
    }
    return count;
  }

private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace geodesign

#endif  // GEODESIGN_RNG_HPP
