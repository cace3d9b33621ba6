#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "mixcheck/expfam.hpp"
#include "mixcheck/rng.hpp"

namespace mixcheck {

struct ChainConfig {
  long steps = 1000;
  long burnin = 200;
  double proposal_scale = 0.2;
  std::uint64_t seed = 0;
  long thin = 1;
  /// Tune proposal_scale during burn-in only; frozen afterwards.
  bool adapt = true;

  void validate() const;
};

// ---------------------------------------------------------------------------
// Sampling on S_n for fixed theta

/// Metropolis chain on S_n: propose a uniform random transposition of
/// positions (L == R allowed) and accept with min(1, e^{theta.(T' - T)}).
/// Starts at the identity; returns the post-burn-in, thinned states.
std::vector<Permutation> metropolis_on_X(const ExpFamilyModel& model, const ChainConfig& config);

struct StatisticTrace {
  std::vector<Vector> values;  // T of each retained state
  double acceptance_rate = 0.0;
};

/// Same chain as metropolis_on_X, keeping only T of the retained states.
StatisticTrace metropolis_statistic_trace(const StatisticSpec& statistic,
                                          std::span<const double> theta,
                                          const ChainConfig& config);

struct MeanEstimate {
  Vector mean;
  Vector std_error;  // batch means
  Vector variance;
};

/// E_theta[T] from a Metropolis run.
MeanEstimate estimate_mean_parameter(const StatisticSpec& statistic,
                                     std::span<const double> theta,
                                     const ChainConfig& config);

/// Exact draws of F(sigma) under P_theta from the level law
/// c_n(j) e^{theta j} / Z(theta). No Markov chain involved.
class FixedPointLevelSampler {
 public:
  explicit FixedPointLevelSampler(int n);

  int n() const noexcept { return counts_.n; }
  std::vector<double> level_probabilities(double theta) const;

  /// One draw of F by inverse CDF.
  int sample(double theta, Engine& rng) const;

  /// Sum of `count` i.i.d. draws of F, via a multinomial over levels.
  long sample_sum(double theta, long count, Engine& rng) const;

 private:
  FixedPointCounts counts_;
};

/// sample_F_level: one exact draw of the fixed-point level.
int sample_F_level(int n, double theta, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Exchange algorithm on parameter space

/// Supplies sum_i T(w_i) for N i.i.d. auxiliary draws w_i ~ P_theta.
class AuxiliarySampler {
 public:
  virtual ~AuxiliarySampler() = default;
  virtual Vector sample_sum(std::span<const double> theta, long count, Engine& rng) const = 0;
  /// False when draws come from a finite Markov chain instead of P_theta itself.
  virtual bool exact() const = 0;
  virtual int dimension() const = 0;
};

class ExactFixedPointAuxiliary final : public AuxiliarySampler {
 public:
  explicit ExactFixedPointAuxiliary(int n) : sampler_(n) {}
  Vector sample_sum(std::span<const double> theta, long count, Engine& rng) const override;
  bool exact() const override { return true; }
  int dimension() const override { return 1; }

 private:
  FixedPointLevelSampler sampler_;
};

/// Approximate auxiliary draws from one inner Metropolis run per call:
/// `inner_burnin` steps, then `count` states spaced `inner_spacing` apart.
class MetropolisAuxiliary final : public AuxiliarySampler {
 public:
  MetropolisAuxiliary(StatisticSpec statistic, long inner_burnin, long inner_spacing);
  Vector sample_sum(std::span<const double> theta, long count, Engine& rng) const override;
  bool exact() const override { return false; }
  int dimension() const override { return statistic_.dimension; }

 private:
  StatisticSpec statistic_;
  long inner_burnin_;
  long inner_spacing_;
};

/// The auxiliary sampler for `statistic`: exact for fixed points, inner
/// Metropolis otherwise.
std::unique_ptr<AuxiliarySampler> make_auxiliary(const StatisticSpec& statistic,
                                                 long inner_burnin = 2000,
                                                 long inner_spacing = 50);

/// Sufficient summary of i.i.d. data: N and sum_i T(x_i).
struct DataSummary {
  long count = 0;
  Vector statistic_sum;

  Vector mean() const;
};

DataSummary summarize(const StatisticSpec& statistic, const std::vector<Permutation>& data);

struct ExchangeStep {
  Vector theta;
  bool accepted = false;
  double log_ratio = 0.0;
};

/// One exchange transition from theta. Proposes theta' = theta + scale * Z,
/// draws the size-N auxiliary at theta', and accepts with min(1, a) where
/// log a = log p(theta') - log p(theta) + (theta' - theta).(S_data - S_aux).
ExchangeStep exchange_step(std::span<const double> theta, const DataSummary& data,
                           const PriorSpec& prior, double proposal_scale,
                           const AuxiliarySampler& auxiliary, Engine& rng,
                           const LogPartitionFn& m_eval = nullptr);

/// Same transition with a caller-supplied proposal theta' (used by tests
/// that discretize the parameter space).
ExchangeStep exchange_transition(std::span<const double> theta, std::span<const double> proposal,
                                 const DataSummary& data, const PriorSpec& prior,
                                 const AuxiliarySampler& auxiliary, Engine& rng,
                                 const LogPartitionFn& m_eval = nullptr);

struct ChainDiagnostics {
  Vector ess;
  Vector split_rhat;
};

struct ParameterChain {
  std::vector<Vector> samples;  // post burn-in, thinned
  std::vector<bool> accepted;   // every step, including burn-in
  double acceptance_rate = 0.0;  // post burn-in
  double proposal_scale = 0.0;   // frozen value used after burn-in
  std::uint64_t seed = 0;
  long burnin = 0;
  long thin = 1;
  ChainDiagnostics diagnostics;
  bool approximate = false;

  std::vector<double> coordinate(int i) const;
};

ParameterChain run_exchange_chain(const DataSummary& data, const AuxiliarySampler& auxiliary,
                                  const PriorSpec& prior, const ChainConfig& config,
                                  const LogPartitionFn& m_eval = nullptr);

/// `chains` replicate chains; chain c uses derive_seed(config.seed, chain, c).
std::vector<ParameterChain> run_replicate_chains(const DataSummary& data,
                                                 const AuxiliarySampler& auxiliary,
                                                 const PriorSpec& prior, const ChainConfig& config,
                                                 int chains, int threads = 1,
                                                 const LogPartitionFn& m_eval = nullptr);

/// Runs f(i) for i in [0, count) on up to `threads` workers. Each index is
/// visited exactly once; callers write results to slot i.
void parallel_for(long count, int threads, const std::function<void(long)>& f);

}  // namespace mixcheck
