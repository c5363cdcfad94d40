#include "cvtele/rng.hpp"

#include <cmath>
#include <numbers>

namespace cvtele {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer
constexpr std::uint64_t finalize(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t CounterStream::mix_key(std::uint64_t seed, std::uint64_t stream) noexcept {
  return finalize(finalize(seed + kGolden) ^ (stream * 0xD1B54A32D192ED03ULL + kGolden));
}

std::uint64_t CounterStream::next_u64() noexcept {
  const std::uint64_t c = counter_++;
  return finalize(key_ ^ finalize((c + 1) * kGolden));
}

double CounterStream::uniform() noexcept {
  // 53 random mantissa bits, shifted off zero.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterStream::normal() noexcept {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace cvtele
