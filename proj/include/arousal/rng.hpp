#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace arousal {

/// splitmix64 finalizer; used to derive independent seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Stable 64-bit seed for (seed, key). Independent of platform and call order.
std::uint64_t hash64(std::uint64_t seed, std::string_view key) noexcept;
std::uint64_t hash64(std::uint64_t seed, std::uint64_t key) noexcept;

/// Portable generator: all draws are derived from raw mt19937_64 output so
/// streams are bit-identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform();
  /// Uniform integer in [0, n), unbiased.
  std::uint64_t index(std::uint64_t n);
  /// Standard normal (Box-Muller).
  double normal();
  double exponential(double mean);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace arousal
