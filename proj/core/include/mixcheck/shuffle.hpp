#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mixcheck/permutation.hpp"
#include "mixcheck/rng.hpp"

namespace mixcheck {

enum class ShuffleKind { random_transpositions, smoosh_placeholder, uniform };

std::string to_string(ShuffleKind kind);
ShuffleKind parse_shuffle_kind(const std::string& text);

struct ShuffleScheme {
  ShuffleKind kind = ShuffleKind::random_transpositions;
  long steps = 0;  // ignored by the uniform kind
  int n = 52;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One draw from the scheme, starting at the identity.
///
/// random_transpositions: `steps` iterations, each picking L and R uniformly
/// and independently from 1..n and swapping the cards at those positions.
/// L == R leaves the deck alone, so a single step has law Q with
/// Q(Id) = 1/n and Q((i j)) = 2/n^2.
/// uniform: Fisher-Yates.
Permutation apply_shuffle(const ShuffleScheme& scheme, Engine& rng);

/// N independent draws; draw i uses its own engine seeded from
/// derive_seed(scheme.seed, dataset_sample, i), so the result does not
/// depend on `threads`.
std::vector<Permutation> sample_dataset(const ShuffleScheme& scheme, long count,
                                        int threads = 1);

Permutation uniform_permutation(int n, Engine& rng);

}  // namespace mixcheck
