#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mixcheck/expfam.hpp"
#include "mixcheck/samplers.hpp"

namespace mixcheck {

struct LogEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Reports above this log Bayes factor show bf = +inf.
inline constexpr double kLogBfOverflow = 700.0;

struct BayesFactorReport {
  double bf = 1.0;
  double log_bf = 0.0;
  double posterior_null = 0.5;
  double prior_odds = 1.0;
  std::vector<double> per_chain_log_bf;
  std::vector<double> per_chain_acceptance;
  std::vector<double> per_chain_ess;
  double rhat = 1.0;
  std::string method;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> chain_seeds;
  std::vector<std::string> warnings;

  /// bf and posterior_null from log_bf and prior_odds.
  static BayesFactorReport from_log_bf(double log_bf, double prior_odds = 1.0);
};

/// log P(Data | theta) = theta . S - N m(theta).
double data_log_likelihood(const DataSummary& data, std::span<const double> theta,
                           const LogPartition& normalizer);

/// Harmonic-mean estimate of log P(Data | H1) from posterior draws:
/// -log((1/M) sum_i 1 / P(Data | theta_i)). Stderr by batch means.
LogEstimate harmonic_mean_marginal(const std::vector<Vector>& samples,
                                   const std::function<double(const Vector&)>& log_likelihood,
                                   int batches = 20);

LogEstimate harmonic_mean_marginal(const ParameterChain& chain, const DataSummary& data,
                                   const LogPartition& normalizer);

struct BayesTestConfig {
  ChainConfig chain{1000, 200, 0.2, 0, 1, true};
  int chains = 20;
  int threads = 1;
  double prior_odds = 1.0;
};

/// H0: theta = 0 against H1: theta ~ prior. P(Data | H0) = (1/n!)^N exactly;
/// P(Data | H1) by the harmonic mean over each replicate exchange chain.
/// The pooled log Bayes factor is the median of the per-chain values.
/// When `chains_out` is given it receives the replicate chains.
BayesFactorReport uniformity_bayes_factor(const DataSummary& data, const StatisticSpec& statistic,
                                          const PriorSpec& prior, const BayesTestConfig& config,
                                          const LogPartition& normalizer,
                                          const AuxiliarySampler& auxiliary,
                                          std::vector<ParameterChain>* chains_out = nullptr);

/// Convenience overload: exact normalizer and auxiliary when available,
/// otherwise throws RuntimeFailure.
BayesFactorReport uniformity_bayes_factor(const DataSummary& data, const StatisticSpec& statistic,
                                          const PriorSpec& prior, const BayesTestConfig& config);

/// Reference value of log P(Data|H0)/P(Data|H1) for one-dimensional models
/// with a normalizer, by dense Simpson quadrature over [lo, hi].
double quadrature_log_bf(const DataSummary& data, const PriorSpec& prior,
                         const LogPartition& normalizer, double lo = -10.0, double hi = 10.0);

// ---------------------------------------------------------------------------
// Closed-form analyses

/// Fair-coin point null against a uniform prior on the bias:
/// BF = (n + 1) C(n, j) 2^{-n}.
double binomial_point_null_log_bf(long n, long j);
double binomial_point_null_bf(long n, long j);

struct LindleyResult {
  double z = 0.0;
  double p_value = 1.0;  // two-sided, normal approximation
  double bf = 1.0;
  double posterior_null = 0.5;
};

LindleyResult lindley_example(long boys, long girls);

/// Uniform null on m cells against a flat Dirichlet(1, ..., 1) alternative:
/// BF = m^{-N} / [Gamma(m) / Gamma(m + N) prod_i Gamma(1 + c_i)].
/// `m` may be astronomically large (e.g. 52!), hence a double.
double flat_dirichlet_log_bf(double m, std::span<const long> cell_counts);
double flat_dirichlet_bf(double m, std::span<const long> cell_counts);

struct CurvePoint {
  double x = 0.0;
  double bf = 1.0;
  double log_bf = 0.0;
};

/// Poisson(1) null against a Gamma(alpha, alpha) prior on the rate.
double gamma_poisson_log_bf(long count, long sum, double alpha);
std::vector<CurvePoint> gamma_poisson_bf_curve(std::span<const long> values,
                                               std::span<const double> alpha_grid);

/// "lo:hi:step" -> lo, lo + step, ... <= hi (inclusive within 1e-9).
std::vector<double> parse_grid(const std::string& text);

}  // namespace mixcheck
