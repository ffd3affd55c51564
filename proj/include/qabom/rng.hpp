// Deterministic, splittable random streams. Every stochastic operation in the
// library takes an explicit RngStream; child streams derived from a parent
// seed are stable across runs, so trajectories and per-seed experiment runs
// can execute in any order (or concurrently) without changing results.
#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>

namespace qabom {

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed)
      : seed_(seed), engine_(detail::splitmix64(seed)) {}

  std::uint64_t seed() const { return seed_; }

  // Children are keyed on the parent seed only, never on how much the parent
  // has already been consumed.
  RngStream derive(std::uint64_t salt) const {
    return RngStream(detail::splitmix64(detail::splitmix64(seed_ ^ 0x6a09e667f3bcc908ULL) ^
                                        detail::splitmix64(salt)));
  }
  RngStream derive(std::string_view label) const { return derive(detail::fnv1a(label)); }
  RngStream derive(std::string_view label, std::uint64_t index) const {
    return derive(detail::fnv1a(label) ^ detail::splitmix64(index ^ 0x243f6a8885a308d3ULL));
  }

  std::uint64_t raw() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  // Unbiased index in [0, n). n == 1 consumes no randomness, so e.g. a
  // single-point dataset draws identically to a fixed clamp.
  std::uint64_t next_index(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("next_index: n must be positive");
    if (n == 1) return 0;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - (std::numeric_limits<std::uint64_t>::max() % n);
    std::uint64_t v = engine_();
    while (v >= limit) v = engine_();
    return v % n;
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace qabom
