#pragma once

#include <cstdint>
#include <random>

namespace rabm {

/// Seeded random stream. The engine is std::mt19937_64, whose output sequence is
/// fixed by the standard; the conversions to real numbers are done here rather than
/// through <random> distributions so that streams are identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer on [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via Box-Muller (one value per call, the sibling is cached).
  double normal();

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Independent child seed for stream `index` of a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace rabm
