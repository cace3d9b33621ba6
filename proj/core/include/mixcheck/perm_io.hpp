#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mixcheck/permutation.hpp"
#include "mixcheck/shuffle.hpp"

namespace mixcheck {

/// Parsed `.perm` file: permutations plus the key=value pairs found in
/// header comments ("# n=52 scheme=random_transpositions k=180 N=200 seed=7").
struct PermDataset {
  std::map<std::string, std::string> header;
  std::vector<Permutation> permutations;

  int n() const;
  std::optional<long> header_long(const std::string& key) const;
};

void write_perm_file(std::ostream& out, const ShuffleScheme& scheme,
                     const std::vector<Permutation>& perms);
PermDataset read_perm_file(std::istream& in);
PermDataset read_perm_file(const std::string& path);

/// "value,count" histogram of a scalar statistic.
struct Histogram {
  std::vector<std::pair<long, long>> rows;  // (value, count), values ascending

  long total() const;
  long sum_of_values() const;
  /// Counts indexed by value 0..max_value; rejects negative values.
  std::vector<long> dense_counts() const;
  std::vector<long> expand() const;  // one entry per observation
};

/// Rejects a histogram with no observations unless `allow_empty`.
Histogram read_histogram_csv(std::istream& in, bool allow_empty = false);
Histogram read_histogram_csv(const std::string& path, bool allow_empty = false);
void write_histogram_csv(std::ostream& out, const Histogram& h);
Histogram histogram_of(const std::vector<long>& values);

/// True when the file looks like a histogram CSV rather than a .perm file.
bool looks_like_histogram(const std::string& path);

}  // namespace mixcheck
