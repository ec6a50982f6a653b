#ifndef DTRBO_RNG_HPP
#define DTRBO_RNG_HPP

#include <cstdint>
#include <random>

namespace dtrbo {

// splitmix64 step; used to mix seeds and derive independent substreams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t s = seed;
  std::uint64_t h = splitmix64(s);
  s ^= a * 0x9e3779b97f4a7c15ULL;
  h ^= splitmix64(s);
  s ^= b * 0xc2b2ae3d27d4eb4fULL;
  h ^= splitmix64(s);
  return h;
}

// Deterministic RNG: all distribution transforms are spelled out here rather than
// delegated to the implementation-defined std distributions, so streams replay
// identically across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  // Strictly inside (0, 1).
  double uniform() { return (static_cast<double>(bits() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal();  // inverse-CDF transform, one variate per call

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Unbiased-enough multiply-shift mapping onto [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(bits()) * n) >> 64);
  }

  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t seed() const { return seed_; }

  // Independent child stream keyed by (a, b); does not disturb this stream.
  Rng substream(std::uint64_t a, std::uint64_t b = 0) const {
    return Rng(mix_seed(seed_, a, b));
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace dtrbo

#endif  // DTRBO_RNG_HPP
