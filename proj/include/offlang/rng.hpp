#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace offlang {

// Counter-based deterministic RNG built on the splitmix64 scrambler. Every
// consumer derives its own stream from (seed, tag, counter), so the shuffle
// for epoch e, the dropout mask for step s, and parameter initialization
// never share state and reproduce bit-for-bit across runs.
class Rng {
 public:
  explicit Rng(std::uint64_t state) : state_(state) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Stream for a (seed, tag, counter) triple, e.g. (seed, kShuffle, epoch).
  static Rng stream(std::uint64_t seed, std::uint64_t tag,
                    std::uint64_t counter = 0) {
    return Rng(mix(mix(mix(seed) ^ tag) ^ counter));
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n) without modulo bias.
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % n;
  }

  // Uniform in [0, 1).
  double next_real() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Box-Muller; consumes two uniforms per draw.
  double next_normal(double mean, double stddev) {
    const double u1 =
        static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = next_real();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(2.0 * std::numbers::pi * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

// Stream tags. Values are arbitrary but frozen: changing them changes every
// seeded artifact.
inline constexpr std::uint64_t kStreamInit = 0x696E6974ull;      // "init"
inline constexpr std::uint64_t kStreamShuffle = 0x73687566ull;   // "shuf"
inline constexpr std::uint64_t kStreamDropout = 0x64726F70ull;   // "drop"

}  // namespace offlang
