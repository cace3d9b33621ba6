#include "mixcheck/inference.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mixcheck/diagnostics.hpp"
#include "mixcheck/error.hpp"
#include "mixcheck/log_math.hpp"

namespace mixcheck {

BayesFactorReport BayesFactorReport::from_log_bf(double log_bf, double prior_odds) {
  if (!(prior_odds > 0.0)) throw ValidationError("prior odds must be > 0");
  BayesFactorReport r;
  r.log_bf = log_bf;
  r.prior_odds = prior_odds;
  r.bf = log_bf > kLogBfOverflow ? std::numeric_limits<double>::infinity() : std::exp(log_bf);
  const double log_odds = log_bf + std::log(prior_odds);
  // odds / (1 + odds), written to stay accurate at both extremes.
  r.posterior_null = log_odds > 0.0 ? 1.0 / (1.0 + std::exp(-log_odds))
                                    : std::exp(log_odds) / (1.0 + std::exp(log_odds));
  return r;
}

double data_log_likelihood(const DataSummary& data, std::span<const double> theta,
                           const LogPartition& normalizer) {
  if (data.count == 0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) s += theta[i] * data.statistic_sum[i];
  return s - static_cast<double>(data.count) * normalizer.log_z(theta);
}

LogEstimate harmonic_mean_marginal(const std::vector<Vector>& samples,
                                   const std::function<double(const Vector&)>& log_likelihood,
                                   int batches) {
  if (samples.empty()) throw ValidationError("harmonic mean needs a non-empty chain");
  const auto m = samples.size();
  std::vector<double> neg(m);
  for (std::size_t i = 0; i < m; ++i) neg[i] = -log_likelihood(samples[i]);
  const double log_mean_inv = log_sum_exp(neg) - std::log(static_cast<double>(m));
  LogEstimate est;
  est.value = -log_mean_inv;

  const auto b = std::min<std::size_t>(static_cast<std::size_t>(std::max(batches, 2)), m / 2);
  if (b < 2) {
    est.std_error = std::numeric_limits<double>::infinity();
    return est;
  }
  const auto size = m / b;
  std::vector<double> rel(b);
  for (std::size_t k = 0; k < b; ++k) {
    std::span<const double> chunk(neg.data() + k * size, size);
    rel[k] = std::exp(log_sum_exp(chunk) - std::log(static_cast<double>(size)) - log_mean_inv);
  }
  est.std_error = std::sqrt(sample_variance(rel) / static_cast<double>(b));
  return est;
}

LogEstimate harmonic_mean_marginal(const ParameterChain& chain, const DataSummary& data,
                                   const LogPartition& normalizer) {
  return harmonic_mean_marginal(chain.samples, [&](const Vector& theta) {
    return data_log_likelihood(data, theta, normalizer);
  });
}

namespace {

/// Median of exp(values) returned in log form.
double log_median_of_exp(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const auto k = values.size();
  if (k % 2 == 1) return values[k / 2];
  const double a = values[k / 2 - 1], b = values[k / 2];
  const double hi = std::max(a, b);
  return hi + std::log((std::exp(a - hi) + std::exp(b - hi)) / 2.0);
}

std::string fixed(double v, int digits = 3) {
  std::ostringstream os;
  os.precision(digits);
  os << std::fixed << v;
  return os.str();
}

}  // namespace

BayesFactorReport uniformity_bayes_factor(const DataSummary& data, const StatisticSpec& statistic,
                                          const PriorSpec& prior, const BayesTestConfig& config,
                                          const LogPartition& normalizer,
                                          const AuxiliarySampler& auxiliary,
                                          std::vector<ParameterChain>* chains_out) {
  prior.validate(&statistic);
  config.chain.validate();
  if (static_cast<int>(data.statistic_sum.size()) != statistic.dimension) {
    throw ValidationError("data summary dimension does not match statistic");
  }
  const double log_n_fact = log_factorial(statistic.n);
  LogPartitionFn m_eval = [&](std::span<const double> theta) { return normalizer.log_z(theta); };
  const auto chains = run_replicate_chains(data, auxiliary, prior, config.chain, config.chains,
                                           config.threads, m_eval);

  // Log-likelihood relative to H0, so log BF = -log P_hat(Data | H1) + log P(Data | H0).
  auto relative_log_lik = [&](const Vector& theta) {
    if (data.count == 0) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) s += theta[i] * data.statistic_sum[i];
    return s - static_cast<double>(data.count) * (normalizer.log_z(theta) - log_n_fact);
  };

  std::vector<double> per_chain;
  std::vector<std::vector<double>> first_coordinate;
  BayesFactorReport tmp;
  for (const auto& c : chains) {
    const auto hm = harmonic_mean_marginal(c.samples, relative_log_lik);
    per_chain.push_back(-hm.value);
    first_coordinate.push_back(c.coordinate(0));
    tmp.per_chain_acceptance.push_back(c.acceptance_rate);
    tmp.per_chain_ess.push_back(*std::min_element(c.diagnostics.ess.begin(), c.diagnostics.ess.end()));
    tmp.chain_seeds.push_back(c.seed);
  }

  auto report = BayesFactorReport::from_log_bf(log_median_of_exp(per_chain), config.prior_odds);
  report.per_chain_log_bf = std::move(per_chain);
  report.per_chain_acceptance = std::move(tmp.per_chain_acceptance);
  report.per_chain_ess = std::move(tmp.per_chain_ess);
  report.chain_seeds = std::move(tmp.chain_seeds);
  report.seed = config.chain.seed;
  report.method = "exchange+harmonic_mean";
  report.rhat = chains.size() > 1 ? split_rhat(first_coordinate)
                                  : chains.front().diagnostics.split_rhat.front();

  report.warnings.push_back(
      "harmonic mean estimator: P(Data|H1) estimates can have high variance; compare per-chain values");
  if (std::isfinite(report.rhat) && report.rhat > 1.1) {
    report.warnings.push_back("R-hat " + fixed(report.rhat) + " > 1.1 across chains");
  } else if (!std::isfinite(report.rhat)) {
    report.warnings.push_back("R-hat undefined (chains too short)");
  }
  const double min_ess = *std::min_element(report.per_chain_ess.begin(), report.per_chain_ess.end());
  if (min_ess < 100.0) {
    report.warnings.push_back("low effective sample size (min " + fixed(min_ess, 1) + " < 100)");
  }
  if (!auxiliary.exact()) {
    report.warnings.push_back("approximate auxiliary draws (inner Metropolis); exchange chain is approximate");
  }
  if (normalizer.source() != NormalizerSource::exact) {
    report.warnings.push_back("P(Data|theta) uses an estimated normalizer (" +
                              to_string(normalizer.source()) + ")");
  }
  if (chains_out) *chains_out = chains;
  return report;
}

BayesFactorReport uniformity_bayes_factor(const DataSummary& data, const StatisticSpec& statistic,
                                          const PriorSpec& prior, const BayesTestConfig& config) {
  const auto normalizer = exact_partition_for(statistic);
  if (!normalizer) {
    throw RuntimeFailure("statistic '" + statistic.name +
                         "' has no exact normalizer; supply a normalizer table");
  }
  const auto auxiliary = make_auxiliary(statistic);
  return uniformity_bayes_factor(data, statistic, prior, config, *normalizer, *auxiliary);
}

double quadrature_log_bf(const DataSummary& data, const PriorSpec& prior,
                         const LogPartition& normalizer, double lo, double hi) {
  if (normalizer.dimension() != 1) throw UnsupportedError("quadrature reference is one-dimensional");
  if (!(lo < hi)) throw ValidationError("quadrature range must satisfy lo < hi");
  constexpr int kIntervals = 40000;
  const double h = (hi - lo) / kIntervals;
  const double log0 = normalizer.log_z(std::vector<double>{0.0});
  LogPartitionFn m_eval = [&](std::span<const double> t) { return normalizer.log_z(t); };
  std::vector<double> joint, prior_only;
  joint.reserve(kIntervals + 1);
  prior_only.reserve(kIntervals + 1);
  for (int k = 0; k <= kIntervals; ++k) {
    const std::vector<double> theta{lo + k * h};
    const double w = (k == 0 || k == kIntervals) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    const double lp = prior_log_density(prior, theta, m_eval) + std::log(w * h / 3.0);
    const double ll = data.count == 0
                          ? 0.0
                          : theta[0] * data.statistic_sum[0] -
                                static_cast<double>(data.count) * (normalizer.log_z(theta) - log0);
    joint.push_back(lp + ll);
    prior_only.push_back(lp);
  }
  return -(log_sum_exp(joint) - log_sum_exp(prior_only));
}

// ---------------------------------------------------------------------------

double binomial_point_null_log_bf(long n, long j) {
  if (n < 0 || j < 0 || j > n) throw ValidationError("binomial Bayes factor needs 0 <= j <= n");
  return std::log(static_cast<double>(n) + 1.0) + log_binomial(n, j) -
         static_cast<double>(n) * std::log(2.0);
}

double binomial_point_null_bf(long n, long j) { return std::exp(binomial_point_null_log_bf(n, j)); }

LindleyResult lindley_example(long boys, long girls) {
  if (boys <= 0 || girls <= 0) throw ValidationError("birth counts must be positive");
  const long n = boys + girls;
  LindleyResult r;
  const double half = static_cast<double>(n) / 2.0;
  r.z = (static_cast<double>(boys) - half) / std::sqrt(static_cast<double>(n) / 4.0);
  r.p_value = std::erfc(std::abs(r.z) / std::sqrt(2.0));
  const double log_bf = binomial_point_null_log_bf(n, boys);
  const auto rep = BayesFactorReport::from_log_bf(log_bf);
  r.bf = rep.bf;
  r.posterior_null = rep.posterior_null;
  return r;
}

double flat_dirichlet_log_bf(double m, std::span<const long> cell_counts) {
  if (!(m >= 2.0)) throw ValidationError("flat Dirichlet Bayes factor needs m >= 2 cells");
  long total = 0;
  CompensatedSum acc;
  for (long c : cell_counts) {
    if (c < 0) throw ValidationError("cell counts must be >= 0");
    total += c;
    acc.add(-std::lgamma(static_cast<double>(c) + 1.0));
  }
  if (static_cast<double>(cell_counts.size()) > m) {
    throw ValidationError("more occupied cells than the sample space has");
  }
  for (long i = 0; i < total; ++i) acc.add(std::log1p(static_cast<double>(i) / m));
  return acc.value();
}

double flat_dirichlet_bf(double m, std::span<const long> cell_counts) {
  return std::exp(flat_dirichlet_log_bf(m, cell_counts));
}

double gamma_poisson_log_bf(long count, long sum, double alpha) {
  if (!(alpha > 0.0)) throw ValidationError("alpha must be > 0");
  if (count < 0 || sum < 0) throw ValidationError("Poisson data must be nonnegative");
  if (count == 0) {
    if (sum != 0) throw ValidationError("a sum over no observations must be 0");
    return 0.0;  // both marginals are 1
  }
  const double n = static_cast<double>(count);
  const double s = static_cast<double>(sum);
  const double log_marginal_ratio = alpha * std::log(alpha) - std::lgamma(alpha) +
                                    std::lgamma(alpha + s) - (alpha + s) * std::log(alpha + n);
  return -n - log_marginal_ratio;
}

std::vector<CurvePoint> gamma_poisson_bf_curve(std::span<const long> values,
                                               std::span<const double> alpha_grid) {
  long sum = 0;
  for (long v : values) {
    if (v < 0) throw ValidationError("Poisson data must be nonnegative");
    sum += v;
  }
  std::vector<CurvePoint> out;
  out.reserve(alpha_grid.size());
  for (double a : alpha_grid) {
    const double lb = gamma_poisson_log_bf(static_cast<long>(values.size()), sum, a);
    const auto rep = BayesFactorReport::from_log_bf(lb);
    out.push_back({a, rep.bf, lb});
  }
  return out;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("malformed grid '" + text + "' (expected lo:hi:step)");
    }
  }
  if (parts.size() == 1) return parts;
  if (parts.size() != 3) throw ValidationError("malformed grid '" + text + "' (expected lo:hi:step)");
  const double lo = parts[0], hi = parts[1], step = parts[2];
  if (!(step > 0.0) || hi < lo) throw ValidationError("grid needs lo <= hi and step > 0");
  std::vector<double> out;
  for (long i = 0;; ++i) {
    const double v = lo + static_cast<double>(i) * step;
    if (v > hi + 1e-9 * step) break;
    out.push_back(v);
  }
  return out;
}

}  // namespace mixcheck
