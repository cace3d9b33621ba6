#pragma once

#include <cstdint>
#include <random>

namespace mixcheck {

using Engine = std::mt19937_64;

/// Stream tags keep seeds drawn for different purposes from colliding.
enum class SeedStream : std::uint64_t {
  dataset_sample = 1,
  chain = 2,
  normalizer_point = 3,
  replication = 4,
  simulation = 5,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Child seed for item `index` of `stream` under `master`. Depends only on
/// its arguments, so work can be split across threads in any order.
constexpr std::uint64_t derive_seed(std::uint64_t master, SeedStream stream,
                                    std::uint64_t index) noexcept {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
  return splitmix64(h ^ index);
}

inline Engine make_engine(std::uint64_t seed) { return Engine{seed}; }

inline double uniform01(Engine& rng) {
  return std::generate_canonical<double, 53>(rng);
}

}  // namespace mixcheck
