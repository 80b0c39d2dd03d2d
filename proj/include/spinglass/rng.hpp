#ifndef SPINGLASS_RNG_HPP
#define SPINGLASS_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace spg {

// splitmix64 finalizer; good avalanche, cheap enough to call per tensor entry.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  return mix64(mix64(a) ^ (b + 0x9E3779B97F4A7C15ULL));
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix64(mix64(a, b) ^ (c + 0xD1B54A32D192ED03ULL));
}

// Counter-based standard normal keyed by (seed, stream, index): any entry is
// reproducible without generating its predecessors.
inline double counter_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const std::uint64_t h1 = mix64(seed, stream, 2 * index);
  const std::uint64_t h2 = mix64(seed, stream, 2 * index + 1);
  // Box-Muller; u1 bounded away from 0 so log stays finite.
  const double u1 = ((h1 >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = (h2 >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// Sequential RNG for chain simulation; seeded hierarchically so sub-results
// are reproducible in isolation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(mix64(seed)) {}
  Rng(std::uint64_t seed, std::uint64_t stream) : eng_(mix64(seed, stream)) {}
  Rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t sub) : eng_(mix64(seed, stream, sub)) {}

  double normal() { return normal_(eng_); }
  double uniform() { return uniform_(eng_); }
  // Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(eng_); }
  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace spg

#endif
