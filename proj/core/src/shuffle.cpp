#include "mixcheck/shuffle.hpp"

#include "mixcheck/error.hpp"
#include "mixcheck/samplers.hpp"

namespace mixcheck {

std::string to_string(ShuffleKind kind) {
  switch (kind) {
    case ShuffleKind::random_transpositions: return "random_transpositions";
    case ShuffleKind::smoosh_placeholder: return "smoosh";
    case ShuffleKind::uniform: return "uniform";
  }
  return "unknown";
}

ShuffleKind parse_shuffle_kind(const std::string& text) {
  if (text == "random_transpositions" || text == "transpositions") {
    return ShuffleKind::random_transpositions;
  }
  if (text == "uniform") return ShuffleKind::uniform;
  if (text == "smoosh") return ShuffleKind::smoosh_placeholder;
  throw ValidationError("unknown shuffle scheme '" + text + "'");
}

void ShuffleScheme::validate() const {
  if (n < 1) throw ValidationError("deck size must be >= 1");
  if (kind == ShuffleKind::random_transpositions && steps < 0) {
    throw ValidationError("number of transpositions must be >= 0");
  }
}

Permutation uniform_permutation(int n, Engine& rng) {
  auto sigma = Permutation::identity(n);
  for (int i = n; i >= 2; --i) {
    std::uniform_int_distribution<int> pick(1, i);
    sigma.swap_positions(i, pick(rng));
  }
  return sigma;
}

Permutation apply_shuffle(const ShuffleScheme& scheme, Engine& rng) {
  scheme.validate();
  switch (scheme.kind) {
    case ShuffleKind::uniform:
      return uniform_permutation(scheme.n, rng);
    case ShuffleKind::random_transpositions: {
      auto sigma = Permutation::identity(scheme.n);
      std::uniform_int_distribution<int> pick(1, scheme.n);
      for (long step = 0; step < scheme.steps; ++step) {
        const int l = pick(rng);
        const int r = pick(rng);
        sigma.swap_positions(l, r);
      }
      return sigma;
    }
    case ShuffleKind::smoosh_placeholder:
      throw UnsupportedError(
          "smoosh shuffles are not simulated; ingest recorded data from a .perm or histogram file");
  }
  throw std::logic_error("unhandled shuffle kind");
}

std::vector<Permutation> sample_dataset(const ShuffleScheme& scheme, long count, int threads) {
  scheme.validate();
  if (count < 1) throw ValidationError("sample count must be >= 1");
  std::vector<Permutation> out(static_cast<std::size_t>(count), Permutation::identity(scheme.n));
  parallel_for(count, threads, [&](long i) {
    auto rng = make_engine(derive_seed(scheme.seed, SeedStream::dataset_sample,
                                       static_cast<std::uint64_t>(i)));
    out[static_cast<std::size_t>(i)] = apply_shuffle(scheme, rng);
  });
  return out;
}

}  // namespace mixcheck
