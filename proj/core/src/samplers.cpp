#include "mixcheck/samplers.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "mixcheck/diagnostics.hpp"
#include "mixcheck/error.hpp"
#include "mixcheck/log_math.hpp"

namespace mixcheck {

void ChainConfig::validate() const {
  if (burnin < 0) throw ValidationError("burn-in must be >= 0");
  if (steps <= burnin) throw ValidationError("chain steps must exceed burn-in");
  if (thin < 1) throw ValidationError("thinning must be >= 1");
  if (!(proposal_scale >= 0.0)) throw ValidationError("proposal scale must be >= 0");
}

void parallel_for(long count, int threads, const std::function<void(long)>& f) {
  if (count <= 0) return;
  if (threads <= 1 || count == 1) {
    for (long i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (long i = next++; i < count; i = next++) {
      try {
        f(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const long workers = std::min<long>(threads, count);
    for (long t = 0; t < workers; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Shared Metropolis loop; `keep` is called with each retained state.
template <typename Keep>
double run_metropolis(const StatisticSpec& statistic, std::span<const double> theta,
                      const ChainConfig& config, Keep&& keep) {
  config.validate();
  if (static_cast<int>(theta.size()) != statistic.dimension) {
    throw ValidationError("theta dimension does not match statistic");
  }
  auto rng = make_engine(config.seed);
  std::uniform_int_distribution<int> pick(1, statistic.n);
  auto state = Permutation::identity(statistic.n);
  auto t_state = statistic(state);
  double log_w = dot(theta, t_state);
  long accepted_after_burnin = 0;
  for (long step = 0; step < config.steps; ++step) {
    const int l = pick(rng);
    const int r = pick(rng);
    const double u = uniform01(rng);
    bool accept = true;
    if (l != r) {
      state.swap_positions(l, r);
      auto t_prop = statistic(state);
      const double log_w_prop = dot(theta, t_prop);
      const double log_a = log_w_prop - log_w;
      accept = log_a >= 0.0 || u < std::exp(log_a);
      if (accept) {
        t_state = std::move(t_prop);
        log_w = log_w_prop;
      } else {
        state.swap_positions(l, r);
      }
    }
    if (step >= config.burnin) {
      if (accept) ++accepted_after_burnin;
      if ((step - config.burnin) % config.thin == 0) keep(state, t_state);
    }
  }
  return static_cast<double>(accepted_after_burnin) /
         static_cast<double>(config.steps - config.burnin);
}

}  // namespace

std::vector<Permutation> metropolis_on_X(const ExpFamilyModel& model, const ChainConfig& config) {
  std::vector<Permutation> out;
  run_metropolis(model.statistic(), model.theta(), config,
                 [&](const Permutation& s, const Vector&) { out.push_back(s); });
  return out;
}

StatisticTrace metropolis_statistic_trace(const StatisticSpec& statistic,
                                          std::span<const double> theta,
                                          const ChainConfig& config) {
  StatisticTrace trace;
  trace.acceptance_rate = run_metropolis(statistic, theta, config,
                                         [&](const Permutation&, const Vector& t) { trace.values.push_back(t); });
  return trace;
}

MeanEstimate estimate_mean_parameter(const StatisticSpec& statistic,
                                     std::span<const double> theta, const ChainConfig& config) {
  const auto trace = metropolis_statistic_trace(statistic, theta, config);
  MeanEstimate est;
  for (int i = 0; i < statistic.dimension; ++i) {
    std::vector<double> xs;
    xs.reserve(trace.values.size());
    for (const auto& t : trace.values) xs.push_back(t[static_cast<std::size_t>(i)]);
    est.mean.push_back(mean(xs));
    est.variance.push_back(sample_variance(xs));
    est.std_error.push_back(batch_means_stderr(xs));
  }
  return est;
}

// ---------------------------------------------------------------------------

FixedPointLevelSampler::FixedPointLevelSampler(int n) : counts_(fixed_point_counts(n)) {}

std::vector<double> FixedPointLevelSampler::level_probabilities(double theta) const {
  const double lz = exact_log_Z(counts_, theta);
  std::vector<double> p(counts_.log_counts.size());
  for (std::size_t j = 0; j < p.size(); ++j) {
    p[j] = std::exp(counts_.log_counts[j] + theta * static_cast<double>(j) - lz);
  }
  return p;
}

int FixedPointLevelSampler::sample(double theta, Engine& rng) const {
  const auto p = level_probabilities(theta);
  const double u = uniform01(rng);
  double cdf = 0.0;
  int last_positive = 0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] <= 0.0) continue;
    last_positive = static_cast<int>(j);
    cdf += p[j];
    if (u < cdf) return static_cast<int>(j);
  }
  return last_positive;
}

long FixedPointLevelSampler::sample_sum(double theta, long count, Engine& rng) const {
  if (count <= 0) return 0;
  const auto p = level_probabilities(theta);
  long remaining = count;
  double remaining_mass = 1.0;
  long sum = 0;
  for (std::size_t j = 0; j < p.size() && remaining > 0; ++j) {
    if (p[j] <= 0.0) continue;
    long c = remaining;
    const double q = p[j] / remaining_mass;
    if (q < 1.0) {
      std::binomial_distribution<long> draw(remaining, std::max(0.0, q));
      c = draw(rng);
    }
    sum += static_cast<long>(j) * c;
    remaining -= c;
    remaining_mass -= p[j];
    if (remaining_mass <= 0.0) remaining_mass = 0.0;
  }
  if (remaining > 0) {
    // Rounding left mass unassigned; put it on the last attainable level.
    for (std::size_t j = p.size(); j-- > 0;) {
      if (p[j] > 0.0) {
        sum += static_cast<long>(j) * remaining;
        break;
      }
    }
  }
  return sum;
}

int sample_F_level(int n, double theta, std::uint64_t seed) {
  auto rng = make_engine(seed);
  return FixedPointLevelSampler(n).sample(theta, rng);
}

Vector ExactFixedPointAuxiliary::sample_sum(std::span<const double> theta, long count,
                                            Engine& rng) const {
  return {static_cast<double>(sampler_.sample_sum(theta[0], count, rng))};
}

MetropolisAuxiliary::MetropolisAuxiliary(StatisticSpec statistic, long inner_burnin,
                                         long inner_spacing)
    : statistic_(std::move(statistic)), inner_burnin_(inner_burnin), inner_spacing_(inner_spacing) {
  if (inner_burnin_ < 0 || inner_spacing_ < 1) {
    throw ValidationError("inner Metropolis needs burn-in >= 0 and spacing >= 1");
  }
}

Vector MetropolisAuxiliary::sample_sum(std::span<const double> theta, long count,
                                       Engine& rng) const {
  Vector sum(static_cast<std::size_t>(statistic_.dimension), 0.0);
  if (count <= 0) return sum;
  ChainConfig inner;
  inner.burnin = inner_burnin_;
  inner.steps = inner_burnin_ + count * inner_spacing_;
  inner.thin = inner_spacing_;
  inner.seed = rng();
  run_metropolis(statistic_, theta, inner, [&](const Permutation&, const Vector& t) {
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += t[i];
  });
  return sum;
}

std::unique_ptr<AuxiliarySampler> make_auxiliary(const StatisticSpec& statistic,
                                                 long inner_burnin, long inner_spacing) {
  if (statistic.exact_counts && statistic.name == "fixed-points") {
    return std::make_unique<ExactFixedPointAuxiliary>(statistic.n);
  }
  return std::make_unique<MetropolisAuxiliary>(statistic, inner_burnin, inner_spacing);
}

Vector DataSummary::mean() const {
  Vector m(statistic_sum.size(), 0.0);
  if (count == 0) return m;
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = statistic_sum[i] / static_cast<double>(count);
  return m;
}

DataSummary summarize(const StatisticSpec& statistic, const std::vector<Permutation>& data) {
  DataSummary s;
  s.statistic_sum.assign(static_cast<std::size_t>(statistic.dimension), 0.0);
  for (const auto& p : data) {
    if (p.size() != statistic.n) throw ValidationError("data permutation size does not match statistic");
    const auto t = statistic(p);
    for (std::size_t i = 0; i < t.size(); ++i) s.statistic_sum[i] += t[i];
  }
  s.count = static_cast<long>(data.size());
  return s;
}

// ---------------------------------------------------------------------------

ExchangeStep exchange_transition(std::span<const double> theta, std::span<const double> proposal,
                                 const DataSummary& data, const PriorSpec& prior,
                                 const AuxiliarySampler& auxiliary, Engine& rng,
                                 const LogPartitionFn& m_eval) {
  ExchangeStep out;
  out.theta.assign(theta.begin(), theta.end());
  const double lp_new = prior_log_density(prior, proposal, m_eval);
  const double u = uniform01(rng);
  if (!std::isfinite(lp_new)) {
    out.log_ratio = kNegInf;
    return out;
  }
  const double lp_old = prior_log_density(prior, theta, m_eval);
  Vector aux;
  try {
    aux = auxiliary.sample_sum(proposal, data.count, rng);
  } catch (const std::exception& e) {
    throw RuntimeFailure(std::string("auxiliary sampling failed: ") + e.what());
  }
  double log_a = lp_new - lp_old;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    log_a += (proposal[i] - theta[i]) * (data.statistic_sum[i] - aux[i]);
  }
  out.log_ratio = log_a;
  if (log_a >= 0.0 || std::log(u) < log_a) {
    out.theta.assign(proposal.begin(), proposal.end());
    out.accepted = true;
  }
  return out;
}

ExchangeStep exchange_step(std::span<const double> theta, const DataSummary& data,
                           const PriorSpec& prior, double proposal_scale,
                           const AuxiliarySampler& auxiliary, Engine& rng,
                           const LogPartitionFn& m_eval) {
  std::normal_distribution<double> z(0.0, 1.0);
  Vector proposal(theta.begin(), theta.end());
  for (auto& v : proposal) v += proposal_scale * z(rng);
  return exchange_transition(theta, proposal, data, prior, auxiliary, rng, m_eval);
}

std::vector<double> ParameterChain::coordinate(int i) const {
  std::vector<double> xs;
  xs.reserve(samples.size());
  for (const auto& s : samples) xs.push_back(s[static_cast<std::size_t>(i)]);
  return xs;
}

namespace {

constexpr double kTargetAcceptance = 0.44;
constexpr long kAdaptWindow = 50;

Vector initial_theta(const PriorSpec& prior, int dimension) {
  switch (prior.kind) {
    case PriorKind::normal:
      if (prior.mu.size() == 1) return Vector(static_cast<std::size_t>(dimension), prior.mu[0]);
      return prior.mu;
    case PriorKind::conjugate:
      return Vector(static_cast<std::size_t>(dimension), 0.0);
    case PriorKind::gamma:
      break;
  }
  throw UnsupportedError(
      "gamma priors describe a Poisson rate; use the conjugate-curve analysis instead");
}

}  // namespace

ParameterChain run_exchange_chain(const DataSummary& data, const AuxiliarySampler& auxiliary,
                                  const PriorSpec& prior, const ChainConfig& config,
                                  const LogPartitionFn& m_eval) {
  config.validate();
  if (!(config.proposal_scale > 0.0)) throw ValidationError("proposal scale must be > 0");
  if (static_cast<int>(data.statistic_sum.size()) != auxiliary.dimension()) {
    throw ValidationError("data summary dimension does not match the auxiliary sampler");
  }
  prior.validate();
  auto theta = initial_theta(prior, auxiliary.dimension());
  auto rng = make_engine(config.seed);
  double scale = config.proposal_scale;

  ParameterChain chain;
  chain.seed = config.seed;
  chain.burnin = config.burnin;
  chain.thin = config.thin;
  chain.approximate = !auxiliary.exact();
  chain.accepted.reserve(static_cast<std::size_t>(config.steps));
  long window_accepts = 0;
  long kept_accepts = 0;
  for (long step = 0; step < config.steps; ++step) {
    auto next = exchange_step(theta, data, prior, scale, auxiliary, rng, m_eval);
    theta = std::move(next.theta);
    chain.accepted.push_back(next.accepted);
    if (step < config.burnin) {
      if (next.accepted) ++window_accepts;
      if (config.adapt && (step + 1) % kAdaptWindow == 0) {
        const double rate = static_cast<double>(window_accepts) / kAdaptWindow;
        scale *= std::exp(2.0 * (rate - kTargetAcceptance));
        window_accepts = 0;
      }
      continue;
    }
    if (next.accepted) ++kept_accepts;
    if ((step - config.burnin) % config.thin == 0) chain.samples.push_back(theta);
  }
  chain.proposal_scale = scale;
  chain.acceptance_rate =
      static_cast<double>(kept_accepts) / static_cast<double>(config.steps - config.burnin);
  for (int i = 0; i < auxiliary.dimension(); ++i) {
    const auto xs = chain.coordinate(i);
    chain.diagnostics.ess.push_back(effective_sample_size(xs));
    chain.diagnostics.split_rhat.push_back(split_rhat(std::span<const double>(xs)));
  }
  return chain;
}

std::vector<ParameterChain> run_replicate_chains(const DataSummary& data,
                                                 const AuxiliarySampler& auxiliary,
                                                 const PriorSpec& prior, const ChainConfig& config,
                                                 int chains, int threads,
                                                 const LogPartitionFn& m_eval) {
  if (chains < 1) throw ValidationError("need at least one chain");
  std::vector<ParameterChain> out(static_cast<std::size_t>(chains));
  parallel_for(chains, threads, [&](long c) {
    auto cfg = config;
    cfg.seed = derive_seed(config.seed, SeedStream::chain, static_cast<std::uint64_t>(c));
    out[static_cast<std::size_t>(c)] = run_exchange_chain(data, auxiliary, prior, cfg, m_eval);
  });
  return out;
}

}  // namespace mixcheck
