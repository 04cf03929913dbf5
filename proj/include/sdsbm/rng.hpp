#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace sdsbm {

/// SplitMix64 finalizer. Used to turn (seed, key...) tuples into well-spread stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic random stream.
///
/// Bits come from std::mt19937_64, whose output sequence is fixed by the
/// standard. Uniform and normal variates are derived here rather than through
/// <random> distributions, whose algorithms are implementation-defined:
///   uniform(): top 53 bits scaled to [0, 1)
///   normal():  Box-Muller, cosine branch only, two uniforms per draw
/// so a given seed produces the same sequence with any standard library.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  /// Stream for one keyed sub-task (e.g. a block pair) of a master seed.
  static RngStream derive(std::uint64_t master_seed, std::uint64_t key_a, std::uint64_t key_b = 0) {
    std::uint64_t s = mix64(master_seed);
    s = mix64(s ^ mix64(key_a + 1));
    s = mix64(s ^ mix64((key_b + 1) << 1));
    return RngStream(s);
  }

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double variance) { return mean + std::sqrt(variance) * normal(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace sdsbm
