#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mixcheck/perm_io.hpp"
#include "mixcheck/samplers.hpp"
#include "mixcheck/statistics.hpp"

namespace mixcheck::cli {

/// Data from either a .perm file or a "value,count" histogram of the
/// statistic. Histograms carry no permutations, so only scalar statistics
/// can be evaluated on them.
struct Observations {
  std::string path;
  bool histogram_input = false;
  int n = 0;               // 0 when a histogram is given without --n
  std::optional<long> k;   // shuffle steps from a .perm header
  std::vector<Permutation> permutations;
  Histogram values;        // scalar statistic values, either way
};

/// `text` is the file content, already read by the run record.
/// `n_flag` = 0 means "take n from the data".
Observations parse_observations(const std::string& path, const std::string& text,
                                const std::string& statistic, int n_flag, bool allow_empty = false);

/// N and the statistic sum; histograms need a scalar statistic.
DataSummary summarize(const Observations& obs, const StatisticSpec& statistic);

}  // namespace mixcheck::cli
