#pragma once

#include <cstdint>
#include <random>

namespace skewerg {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Named seed streams derived from a root seed.
///
/// Stream i of root r is seeded with splitmix64(splitmix64(r) + i). Child
/// streams nest the same rule, so stream(i).stream(j) is reproducible from
/// (r, i, j) alone and never depends on how many draws other streams made.
class SeedStream {
 public:
  explicit SeedStream(std::uint64_t root) : root_(root) {}

  std::uint64_t root() const noexcept { return root_; }

  std::uint64_t seed_for(std::uint64_t index) const noexcept {
    return splitmix64(splitmix64(root_) + index);
  }

  SeedStream stream(std::uint64_t index) const noexcept { return SeedStream(seed_for(index)); }

  Engine engine(std::uint64_t index) const { return Engine(seed_for(index)); }

 private:
  std::uint64_t root_;
};

inline double standard_normal(Engine& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return n(rng);
}

}  // namespace skewerg
