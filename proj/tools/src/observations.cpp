#include "observations.hpp"

#include <cmath>
#include <sstream>

#include "mixcheck/error.hpp"

namespace mixcheck::cli {

namespace {

bool is_histogram_text(const std::string& path, const std::string& text) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") return true;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    return line.find(',') != std::string::npos;
  }
  return false;
}

long integer_value(double v, const std::string& statistic) {
  const double r = std::round(v);
  if (std::abs(v - r) > 1e-9) {
    throw ValidationError("statistic '" + statistic + "' produced a non-integer value");
  }
  return static_cast<long>(r);
}

}  // namespace

Observations parse_observations(const std::string& path, const std::string& text,
                                const std::string& statistic, int n_flag, bool allow_empty) {
  Observations obs;
  obs.path = path;
  std::istringstream in(text);
  if (is_histogram_text(path, text)) {
    obs.histogram_input = true;
    obs.values = read_histogram_csv(in, allow_empty);
    obs.n = n_flag;
    return obs;
  }
  auto ds = read_perm_file(in);
  obs.n = ds.n();
  if (n_flag != 0 && n_flag != obs.n) {
    throw ValidationError("--n " + std::to_string(n_flag) + " does not match n=" +
                          std::to_string(obs.n) + " in '" + path + "'");
  }
  obs.k = ds.header_long("k");
  const auto spec = make_statistic(statistic, obs.n);
  if (spec.dimension == 1) {
    std::vector<long> v;
    v.reserve(ds.permutations.size());
    for (const auto& p : ds.permutations) v.push_back(integer_value(spec(p)[0], statistic));
    obs.values = histogram_of(v);
  }
  obs.permutations = std::move(ds.permutations);
  return obs;
}

DataSummary summarize(const Observations& obs, const StatisticSpec& statistic) {
  if (!obs.histogram_input) return mixcheck::summarize(statistic, obs.permutations);
  if (statistic.dimension != 1) {
    throw ValidationError("histogram input supports scalar statistics only; '" + statistic.name +
                          "' is " + std::to_string(statistic.dimension) + "-dimensional");
  }
  if (!statistic.range.empty()) {
    for (const auto& [v, c] : obs.values.rows) {
      if (c > 0 && (v < statistic.range[0].lo || v > statistic.range[0].hi)) {
        throw ValidationError("histogram value " + std::to_string(v) + " is not attainable by '" +
                              statistic.name + "' at n=" + std::to_string(statistic.n));
      }
    }
  }
  return {obs.values.total(), {static_cast<double>(obs.values.sum_of_values())}};
}

}  // namespace mixcheck::cli
