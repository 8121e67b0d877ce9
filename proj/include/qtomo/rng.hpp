#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace qtomo {

// Counter-based random stream. Draw k of stream (seed, substream) is
//   mix(key(seed, substream) + (k + 1) * golden)
// with mix the SplitMix64 finalizer, so the output depends only on the triple
// (seed, substream, draw index) and is identical on every platform.
// Distribution transforms are done here rather than with <random>
// distributions, whose algorithms are implementation-defined.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t substream)
      : seed_(seed), substream_(substream), key_(mix(seed ^ mix(substream + kGolden))) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t substream() const { return substream_; }
  std::uint64_t draws() const { return counter_; }

  std::uint64_t next_u64() {
    ++counter_;
    return mix(key_ + counter_ * kGolden);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1].
  double uniform_positive() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; consumes two draws and returns both normals.
  std::complex<double> complex_normal() {
    const double r = std::sqrt(-2.0 * std::log(uniform_positive()));
    const double t = 2.0 * std::numbers::pi * uniform();
    return {r * std::cos(t), r * std::sin(t)};
  }

  double normal() { return complex_normal().real(); }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t substream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace qtomo
