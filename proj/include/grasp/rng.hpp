#pragma once

// Deterministic random number utilities.
//
// Every randomized operation in the library takes a single 64-bit seed and
// derives independent sub-streams from it with derive_seed(). The rule is
// fixed and documented so that runs are reproducible across platforms:
//
//   derive_seed(seed, {t1, t2, ...}) = fold of splitmix64 over seed and tags,
//
// where string tags are first reduced with FNV-1a. Bit generation uses
// std::mt19937_64, whose output sequence for a given seed is mandated by the
// standard, and all value mappings (unit doubles, bounded ints, shuffles) are
// implemented here rather than with std::*_distribution, because the
// distributions are implementation-defined and would break cross-platform
// reproducibility.

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>
#include <vector>

namespace grasp {

inline constexpr std::uint64_t splitmix64_next(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Derives a child seed from a parent seed and a list of tag values.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                           std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = splitmix64_next(seed);
  for (std::uint64_t t : tags) h = splitmix64_next(h ^ t);
  return h;
}

inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view name,
                                           std::uint64_t index = 0) {
  return derive_seed(seed, {fnv1a64(name), index});
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  bool bernoulli(double p) { return unit() < p; }

  // Uniform integer in [0, n). Rejection keeps the draw unbiased.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
    std::uint64_t x = next_u64();
    while (x > limit) x = next_u64();
    return x % n;
  }

  // Fisher-Yates; std::shuffle is not reproducible across standard libraries.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace grasp
