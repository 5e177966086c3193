#pragma once

#include <cstdint>
#include <random>

namespace tde {

/// SplitMix64 finalizer. Used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed for sub-stream `index` of `master`. Streams are reproducible
/// regardless of the order or thread in which they are consumed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// Standard normal sampler (Box-Muller) on top of a
/// 64-bit Mersenne Twister. Bit-for-bit reproducible across platforms.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  double next();
  double uniform01();  // in (0, 1)

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace tde
