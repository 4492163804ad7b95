#ifndef CFR_RNG_HPP_
#define CFR_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>

namespace cfr {

/// Deterministic random source. Draws are derived from the raw mt19937_64
/// stream with explicit arithmetic instead of std:: distributions, so the
/// same seed yields the same values on every platform and stdlib.
class Rng {
public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  int64_t uniform_int(int64_t n) {
    return static_cast<int64_t>(uniform() * static_cast<double>(n));
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller; one value per call, cache for the pair.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Derive an independent stream, e.g. one per sample or per sweep cell.
  static uint64_t mix(uint64_t seed, uint64_t salt) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace cfr

#endif  // CFR_RNG_HPP_
