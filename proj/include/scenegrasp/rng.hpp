#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace scenegrasp {

/// Seeded generator with platform-independent output: std::mt19937_64 is
/// fully specified by the standard, and the conversions below avoid the
/// implementation-defined standard distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  /// Uniform integer in [0, n), rejection-sampled (n > 0).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do x = next();
    while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Per-sample stream seed: independent of processing order or thread count.
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view sample_id);

}  // namespace scenegrasp
