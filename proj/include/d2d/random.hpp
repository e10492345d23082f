#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace d2d {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed-splitting rule: child = splitmix64(master ^ splitmix64(stream * 2^32 + index)).
// Streams keep layout, weight, policy, and fading randomness from overlapping.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                           std::uint64_t index) noexcept {
  return splitmix64(master ^ splitmix64((stream << 32) + index));
}

namespace stream {
inline constexpr std::uint64_t layout = 1;
inline constexpr std::uint64_t weights = 2;
inline constexpr std::uint64_t episode = 3;
inline constexpr std::uint64_t training = 4;
inline constexpr std::uint64_t solver = 5;
inline constexpr std::uint64_t fading = 6;
}  // namespace stream

inline constexpr double to_unit_interval(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Seeded source with portable conversions (std distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // [0, 1)
  double uniform() { return to_unit_interval(engine_()); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Exponential with mean 1.
  double exponential() { return -std::log1p(-uniform()); }
  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, n), n > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// Counter-based exponential(1) fading powers: every (slot, tx, rx) entry is a fixed
// function of the seed, so all M x M gains exist every slot whether or not they are read.
class FadingField {
 public:
  explicit FadingField(std::uint64_t seed) : seed_(seed) {}

  double power(std::uint64_t slot, std::uint32_t tx, std::uint32_t rx) const noexcept {
    const std::uint64_t pair = (static_cast<std::uint64_t>(tx) << 32) | rx;
    const std::uint64_t bits = splitmix64(seed_ ^ splitmix64(slot ^ splitmix64(pair)));
    return -std::log1p(-to_unit_interval(bits));
  }

 private:
  std::uint64_t seed_;
};

}  // namespace d2d
