#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace qsl {

// Counter-style generator (splitmix64). All stochastic behavior in the
// simulator draws from these streams, so runs are reproducible bit for bit
// from a single master seed regardless of the standard library in use.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1), 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), n >= 1. Multiply-shift keeps bias below 2^-64.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  // Standard normal via Box-Muller. Consumes exactly two uniforms per call;
  // the second value of the pair is discarded to keep the stream stateless.
  double gaussian() {
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Subsidiary stream scheme: stream(tag) = SplitMix64(master XOR fnv1a64(tag)).
// Distinct tags give effectively independent streams and adding a new consumer
// never shifts the draws seen by existing ones.
inline SplitMix64 derive_stream(std::uint64_t master_seed, std::string_view tag) {
  return SplitMix64(master_seed ^ fnv1a64(tag));
}

}  // namespace qsl
