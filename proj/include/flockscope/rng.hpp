#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace flockscope {

// One splitmix64 step. Used both as a mixer and as the seed-derivation chain;
// results are identical on every platform, which keeps seeded fixtures stable.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from a master seed and up to two indices.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0) {
  std::uint64_t s = master;
  splitmix64(s);
  s ^= 0x9e3779b97f4a7c15ULL * (a + 1);
  splitmix64(s);
  s ^= 0xc2b2ae3d27d4eb4fULL * (b + 1);
  return splitmix64(s);
}

// Deterministic draws on top of mt19937_64. All distribution transforms are
// spelled out here instead of using std:: distributions, whose outputs vary
// between standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double next_canonical() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform_real(double lo, double hi) {
    return lo + (hi - lo) * next_canonical();
  }

  // Inclusive on both ends.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw std::invalid_argument("uniform_int: empty range");
    std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(engine_());  // full 64-bit range
    return lo + static_cast<std::int64_t>(engine_() % span);
  }

  // Box-Muller; consumes exactly two draws per call (no cached spare).
  double normal(double mean = 0.0, double stddev = 1.0) {
    double u1 = 1.0 - next_canonical();  // (0, 1]
    double u2 = next_canonical();
    double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(2.0 * M_PI * u2);
  }

  // Partial Fisher-Yates: permutes the first k entries of v in place.
  template <typename T>
  void shuffle_prefix(std::vector<T>& v, std::size_t k) {
    const std::size_t n = v.size();
    if (k > n) k = n;
    for (std::size_t i = 0; i + 1 < n && i < k; ++i) {
      std::size_t j = i + static_cast<std::size_t>(
                              uniform_int(0, static_cast<std::int64_t>(n - i - 1)));
      std::swap(v[i], v[j]);
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    shuffle_prefix(v, v.size());
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace flockscope
