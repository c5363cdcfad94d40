#pragma once

#include <cstdint>

namespace cvtele {

/// Root seed of a stochastic run. Every random draw in the library is a pure
/// function of (seed, stream, counter), so results do not depend on the order
/// in which shots are evaluated.
struct Seed {
  std::uint64_t value = 0;
};

/// Counter-based random stream. Stream `k` of a seed is typically the k-th
/// shot or sample; draws within a stream advance an internal counter.
class CounterStream {
 public:
  CounterStream(Seed seed, std::uint64_t stream) noexcept
      : key_(mix_key(seed.value, stream)) {}

  std::uint64_t next_u64() noexcept;

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;

  /// Standard normal via Box-Muller (one variate per two uniforms).
  double normal() noexcept;

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  static std::uint64_t mix_key(std::uint64_t seed, std::uint64_t stream) noexcept;

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace cvtele
