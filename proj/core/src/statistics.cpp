#include "mixcheck/statistics.hpp"

#include "mixcheck/error.hpp"

namespace mixcheck {

int fixed_points(const Permutation& sigma) {
  int count = 0;
  for (int i = 1; i <= sigma.size(); ++i) {
    if (sigma(i) == i) ++count;
  }
  return count;
}

int adjacent_pairs(const Permutation& sigma) {
  if (sigma.size() < 2) throw ValidationError("adjacent_pairs requires n >= 2");
  int count = 0;
  for (int i = 1; i < sigma.size(); ++i) {
    if (sigma(i + 1) == sigma(i) + 1) ++count;
  }
  return count;
}

int position_of_card(const Permutation& sigma, int card) {
  if (card < 1 || card > sigma.size()) {
    throw ValidationError("card " + std::to_string(card) + " outside 1.." +
                          std::to_string(sigma.size()));
  }
  for (int i = 1; i <= sigma.size(); ++i) {
    if (sigma(i) == card) return i;
  }
  throw std::logic_error("position_of_card: permutation is not a bijection");
}

bool StatisticSpec::in_open_hull(const Vector& x, double margin) const {
  if (static_cast<int>(x.size()) != dimension) return false;
  for (int i = 0; i < dimension; ++i) {
    const auto& r = range[static_cast<std::size_t>(i)];
    if (!(x[static_cast<std::size_t>(i)] > r.lo + margin && x[static_cast<std::size_t>(i)] < r.hi - margin)) {
      return false;
    }
  }
  return true;
}

namespace {

std::vector<double> iota_values(int lo, int hi) {
  std::vector<double> out;
  for (int v = lo; v <= hi; ++v) out.push_back(v);
  return out;
}

StatisticSpec position_statistic(const std::string& name, int n, int card) {
  StatisticSpec s;
  s.name = name;
  s.n = n;
  s.dimension = 1;
  s.evaluator = [card](const Permutation& p) { return Vector{double(position_of_card(p, card))}; };
  s.range = {{1.0, double(n)}};
  s.value_support = {iota_values(1, n)};
  s.null_mean = {(n + 1) / 2.0};
  return s;
}

}  // namespace

StatisticSpec make_statistic(const std::string& name, int n) {
  if (n < 1) throw ValidationError("deck size must be >= 1");
  StatisticSpec s;
  s.name = name;
  s.n = n;
  if (name == "fixed-points") {
    s.dimension = 1;
    s.evaluator = [](const Permutation& p) { return Vector{double(fixed_points(p))}; };
    s.range = {{0.0, double(n)}};
    auto support = iota_values(0, n);
    if (n >= 2) support.erase(support.begin() + (n - 1));
    if (n == 1) support = {1.0};
    s.value_support = {support};
    s.null_mean = {1.0};
    s.exact_counts = true;
    return s;
  }
  if (name == "adjacent-pairs") {
    if (n < 2) throw ValidationError("adjacent-pairs requires n >= 2");
    s.dimension = 1;
    s.evaluator = [](const Permutation& p) { return Vector{double(adjacent_pairs(p))}; };
    s.range = {{0.0, double(n - 1)}};
    s.value_support = {iota_values(0, n - 1)};
    s.null_mean = {double(n - 1) / n};
    return s;
  }
  if (name == "top-card-position") return position_statistic(name, n, 1);
  if (name == "bottom-card-position") return position_statistic(name, n, n);
  if (name == "wash-triple") {
    if (n < 2) throw ValidationError("wash-triple requires n >= 2");
    s.dimension = 3;
    s.evaluator = [n](const Permutation& p) {
      return Vector{double(adjacent_pairs(p)), double(position_of_card(p, 1)),
                    double(position_of_card(p, n))};
    };
    s.range = {{0.0, double(n - 1)}, {1.0, double(n)}, {1.0, double(n)}};
    s.value_support = {iota_values(0, n - 1), iota_values(1, n), iota_values(1, n)};
    s.null_mean = {double(n - 1) / n, (n + 1) / 2.0, (n + 1) / 2.0};
    return s;
  }
  throw ValidationError("unknown statistic '" + name + "'");
}

std::vector<std::string> statistic_names() {
  return {"fixed-points", "adjacent-pairs", "top-card-position", "bottom-card-position",
          "wash-triple"};
}

}  // namespace mixcheck
