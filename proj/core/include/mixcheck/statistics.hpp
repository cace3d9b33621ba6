#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mixcheck/permutation.hpp"

namespace mixcheck {

using Vector = std::vector<double>;

/// Number of i with sigma(i) = i.
int fixed_points(const Permutation& sigma);

/// Number of i in 1..n-1 with sigma(i+1) = sigma(i) + 1. Requires n >= 2.
int adjacent_pairs(const Permutation& sigma);

/// The position i with sigma(i) = card.
int position_of_card(const Permutation& sigma, int card);

/// Closed interval of attainable values of one coordinate.
struct ValueRange {
  double lo;
  double hi;
};

/// A named sufficient statistic T: S_n -> R^d.
struct StatisticSpec {
  std::string name;
  int n = 0;
  int dimension = 1;
  std::function<Vector(const Permutation&)> evaluator;
  /// Per-coordinate attainable range. The product box stands in for the
  /// convex hull when checking prior means.
  std::vector<ValueRange> range;
  /// Finite set of attainable values per coordinate, when it is cheap to list.
  std::vector<std::vector<double>> value_support;
  /// E_0[T] under the uniform distribution.
  Vector null_mean;
  /// True when exact level-set counts #{sigma : T(sigma) = t} are available.
  bool exact_counts = false;

  Vector operator()(const Permutation& sigma) const { return evaluator(sigma); }

  /// Is x strictly inside the value hull, with `margin` to spare on every side?
  bool in_open_hull(const Vector& x, double margin = 1e-9) const;
};

/// Known names: fixed-points, adjacent-pairs, top-card-position,
/// bottom-card-position, wash-triple (adjacent-pairs, top, bottom).
StatisticSpec make_statistic(const std::string& name, int n);

std::vector<std::string> statistic_names();

}  // namespace mixcheck
