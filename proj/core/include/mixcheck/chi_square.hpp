#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mixcheck {

/// Null model for the expected counts.
struct ExpectedModel {
  enum class Kind { poisson, uniform, explicit_probs };
  Kind kind = Kind::poisson;
  double lambda = 1.0;
  std::vector<double> probs;  // explicit_probs, or implied by uniform

  static ExpectedModel poisson(double lambda) { return {Kind::poisson, lambda, {}}; }
  static ExpectedModel uniform(int cells);
  static ExpectedModel explicit_probs(std::vector<double> p);
};

/// "poisson:1", "uniform:K", "explicit:p0,p1,...".
ExpectedModel parse_expected_model(const std::string& text);

struct ChiSquareOptions {
  /// Values >= lump_threshold form one tail category; negative disables.
  long lump_threshold = 5;
  /// Tail categories whose expected count is below this are merged into
  /// their neighbour until the tail reaches it.
  double min_expected = 1.0;
};

struct ChiSquareReport {
  std::vector<std::string> categories;
  std::vector<long> observed;
  std::vector<double> expected;
  std::vector<double> probabilities;  // null cell probabilities
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  long lump_threshold = -1;
  double min_expected = 0.0;
  std::string convention;
  std::string model;
};

/// Pearson chi-square test of observed counts (index = value 0, 1, ...)
/// against `model`. Throws ValidationError on empty data or a zero expected
/// cell after lumping.
ChiSquareReport chi_square_test(std::span<const long> observed_by_value,
                                const ExpectedModel& model,
                                const ChiSquareOptions& options = {});

/// Upper-tail probability of the chi-square distribution.
double chi_square_survival(double x, int df);

/// Value with upper-tail probability `alpha`.
double chi_square_upper_quantile(int df, double alpha);

/// Monte Carlo p-value: fraction of `draws` multinomial samples from the
/// report's null cell probabilities whose statistic is >= the observed one.
double simulated_p_value(const ChiSquareReport& report, long draws, std::uint64_t seed);

}  // namespace mixcheck
