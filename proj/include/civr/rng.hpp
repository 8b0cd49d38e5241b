#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>

namespace civr {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based seed derivation: the child seed depends only on the master
/// seed and the key tuple, never on how many other streams were drawn.
template <typename... Keys>
constexpr std::uint64_t derive_seed(std::uint64_t master, Keys... keys) noexcept {
  std::uint64_t h = splitmix64(master);
  ((h = splitmix64(h ^ (static_cast<std::uint64_t>(keys) * 0xD1B54A32D192ED03ULL))), ...);
  return h;
}

/// Stream tags used as the first derivation key.
namespace stream {
inline constexpr std::uint64_t kAnchor = 1;
inline constexpr std::uint64_t kAdvance = 2;
inline constexpr std::uint64_t kSelect = 3;
inline constexpr std::uint64_t kDiagnostics = 4;
inline constexpr std::uint64_t kPeriod = 5;
inline constexpr std::uint64_t kPilot = 6;
inline constexpr std::uint64_t kData = 7;
inline constexpr std::uint64_t kBaseline = 8;
inline constexpr std::uint64_t kRepetition = 9;
}  // namespace stream

/// Lightweight generator used to expand a single draw token into a
/// realization of xi.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr result_type operator()() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

 private:
  std::uint64_t state_;
};

// The distributions below are written out instead of using <random>'s
// distribution objects, whose output is implementation-defined.

/// Uniform double in [0, 1) with 53 random bits.
template <typename Engine>
double uniform01(Engine& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n), unbiased by rejection.
template <typename Engine>
std::uint64_t uniform_index(Engine& engine, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t r = engine();
  while (r >= limit) r = engine();
  return r % n;
}

/// Standard normal via Box-Muller (one variate per pair of uniforms).
template <typename Engine>
double standard_normal(Engine& engine) {
  double u1 = uniform01(engine);
  while (u1 <= 0.0) u1 = uniform01(engine);
  const double u2 = uniform01(engine);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Seeded 64-bit Mersenne twister; bit-identical across platforms.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  result_type operator()() { return engine_(); }
  static constexpr result_type min() noexcept { return std::mt19937_64::min(); }
  static constexpr result_type max() noexcept { return std::mt19937_64::max(); }

  std::uint64_t seed() const noexcept { return seed_; }

  template <typename... Keys>
  Rng child(Keys... keys) const {
    return Rng(derive_seed(seed_, keys...));
  }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

}  // namespace civr
