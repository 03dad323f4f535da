#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gmml {

/// Derive a child seed from a master seed and a stream index (splitmix64 mix).
/// Used to give every Monte Carlo trial its own independent stream so that
/// aggregates are reproducible no matter how trials are scheduled.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seedable 64-bit generator with a fixed sampling algorithm.
///
/// mt19937_64 supplies the raw stream; uniforms come from the top 53 bits and
/// normals from the Box-Muller transform, so sequences are identical across
/// platforms and standard-library versions (std::normal_distribution is not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t raw() { return gen_(); }

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in {0, ..., n-1} by rejection.
  int uniform_int(int n) {
    const std::uint64_t bound = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
    std::uint64_t r;
    do {
      r = gen_();
    } while (r >= bound);
    return static_cast<int>(r % n);
  }

  /// Standard normal via Box-Muller. The second variate of each pair is
  /// discarded to keep the stream position a simple function of call count.
  double normal() {
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace gmml
