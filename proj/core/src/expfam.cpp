#include "mixcheck/expfam.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "mixcheck/error.hpp"
#include "mixcheck/log_math.hpp"

namespace mixcheck {

std::string to_string(NormalizerSource s) {
  switch (s) {
    case NormalizerSource::exact: return "exact";
    case NormalizerSource::importance: return "importance";
    case NormalizerSource::thermodynamic: return "thermo";
  }
  return "unknown";
}

NormalizerSource parse_normalizer_source(const std::string& text) {
  if (text == "exact") return NormalizerSource::exact;
  if (text == "importance") return NormalizerSource::importance;
  if (text == "thermo" || text == "thermodynamic") return NormalizerSource::thermodynamic;
  throw ValidationError("unknown normalizer method '" + text + "' (exact|importance|thermo)");
}

ExactFixedPointPartition::ExactFixedPointPartition(int n) : counts_(fixed_point_counts(n)) {}

double ExactFixedPointPartition::log_z(std::span<const double> theta) const {
  if (theta.size() != 1) throw ValidationError("fixed-point normalizer is one-dimensional");
  return exact_log_Z(counts_, theta[0]);
}

std::vector<double> ExactFixedPointPartition::level_probabilities(double theta) const {
  const double lz = exact_log_Z(counts_, theta);
  std::vector<double> p(counts_.log_counts.size());
  for (std::size_t j = 0; j < p.size(); ++j) {
    p[j] = std::exp(counts_.log_counts[j] + theta * static_cast<double>(j) - lz);
  }
  return p;
}

double ExactFixedPointPartition::mean(double theta) const {
  const auto p = level_probabilities(theta);
  CompensatedSum acc;
  for (std::size_t j = 0; j < p.size(); ++j) acc.add(static_cast<double>(j) * p[j]);
  return acc.value();
}

double ExactFixedPointPartition::variance(double theta) const {
  const auto p = level_probabilities(theta);
  const double mu = mean(theta);
  CompensatedSum acc;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double d = static_cast<double>(j) - mu;
    acc.add(d * d * p[j]);
  }
  return acc.value();
}

ExpFamilyModel::ExpFamilyModel(StatisticSpec statistic, Vector theta,
                               std::shared_ptr<const LogPartition> normalizer)
    : statistic_(std::move(statistic)), theta_(std::move(theta)), normalizer_(std::move(normalizer)) {
  if (static_cast<int>(theta_.size()) != statistic_.dimension) {
    throw ValidationError("theta has dimension " + std::to_string(theta_.size()) +
                          " but statistic '" + statistic_.name + "' has dimension " +
                          std::to_string(statistic_.dimension));
  }
  if (normalizer_ && normalizer_->dimension() != statistic_.dimension) {
    throw ValidationError("normalizer dimension does not match statistic");
  }
}

double ExpFamilyModel::log_weight(const Permutation& sigma) const {
  const auto t = statistic_(sigma);
  double s = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) s += theta_[i] * t[i];
  return s;
}

double ExpFamilyModel::log_partition() const {
  if (std::all_of(theta_.begin(), theta_.end(), [](double v) { return v == 0.0; })) {
    return log_factorial(statistic_.n);
  }
  if (!normalizer_) {
    throw RuntimeFailure("no normalizer available for statistic '" + statistic_.name +
                         "' at nonzero theta; build a normalizer table first");
  }
  return normalizer_->log_z(theta_);
}

double ExpFamilyModel::log_density(const Permutation& sigma) const {
  if (sigma.size() != statistic_.n) throw ValidationError("permutation size does not match model");
  return log_weight(sigma) - log_partition();
}

std::shared_ptr<const LogPartition> exact_partition_for(const StatisticSpec& statistic) {
  if (statistic.exact_counts && statistic.name == "fixed-points") {
    return std::make_shared<ExactFixedPointPartition>(statistic.n);
  }
  return nullptr;
}

namespace {

const ExactFixedPointPartition* exact_fixed_point(const ExpFamilyModel& model) {
  return dynamic_cast<const ExactFixedPointPartition*>(model.normalizer());
}

bool is_zero(const Vector& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

}  // namespace

Vector mean_parameter(const ExpFamilyModel& model) {
  if (const auto* exact = exact_fixed_point(model)) return {exact->mean(model.theta()[0])};
  if (is_zero(model.theta()) && !model.statistic().null_mean.empty()) {
    return model.statistic().null_mean;
  }
  throw RuntimeFailure("E_theta[T] for '" + model.statistic().name +
                       "' needs a sampler estimate (estimate_mean_parameter)");
}

Matrix covariance_parameter(const ExpFamilyModel& model) {
  const auto* exact = exact_fixed_point(model);
  std::shared_ptr<const LogPartition> owned;
  if (!exact && model.statistic().exact_counts && model.statistic().name == "fixed-points") {
    owned = exact_partition_for(model.statistic());
    exact = dynamic_cast<const ExactFixedPointPartition*>(owned.get());
  }
  if (!exact) {
    throw RuntimeFailure("Cov_theta(T) for '" + model.statistic().name +
                         "' has no exact route; estimate it by sampling");
  }
  Matrix m(1, 1);
  m(0, 0) = exact->variance(model.theta()[0]);
  return m;
}

// ---------------------------------------------------------------------------

PriorSpec PriorSpec::conjugate(double n0, Vector x0) {
  PriorSpec p;
  p.kind = PriorKind::conjugate;
  p.n0 = n0;
  p.x0 = std::move(x0);
  return p;
}

PriorSpec PriorSpec::normal(Vector mu, double sigma2) {
  PriorSpec p;
  p.kind = PriorKind::normal;
  p.mu = std::move(mu);
  p.sigma2 = sigma2;
  return p;
}

PriorSpec PriorSpec::gamma(double alpha, double beta) {
  PriorSpec p;
  p.kind = PriorKind::gamma;
  p.alpha = alpha;
  p.beta = beta;
  return p;
}

void PriorSpec::validate(const StatisticSpec* statistic) const {
  switch (kind) {
    case PriorKind::conjugate:
      if (!(n0 > 0.0)) throw ValidationError("conjugate prior requires n0 > 0");
      if (x0.empty()) throw ValidationError("conjugate prior requires x0");
      if (statistic) {
        if (static_cast<int>(x0.size()) != statistic->dimension) {
          throw ValidationError("conjugate prior x0 has the wrong dimension");
        }
        if (!statistic->in_open_hull(x0)) {
          throw ValidationError("conjugate prior x0 must lie inside the value hull of '" +
                                statistic->name + "'");
        }
      }
      return;
    case PriorKind::normal:
      if (!(sigma2 > 0.0)) throw ValidationError("normal prior requires sigma2 > 0");
      if (mu.empty()) throw ValidationError("normal prior requires a mean");
      if (statistic && mu.size() != 1 && static_cast<int>(mu.size()) != statistic->dimension) {
        throw ValidationError("normal prior mean has the wrong dimension");
      }
      return;
    case PriorKind::gamma:
      if (!(alpha > 0.0) || !(beta > 0.0)) throw ValidationError("gamma prior requires alpha, beta > 0");
      return;
  }
}

namespace {

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ValidationError("malformed number '" + item + "' in prior spec");
    }
    if (used != item.size()) throw ValidationError("malformed number '" + item + "' in prior spec");
    out.push_back(v);
  }
  return out;
}

}  // namespace

PriorSpec parse_prior(const std::string& text, const StatisticSpec* statistic) {
  const auto colon = text.find(':');
  const auto kind = text.substr(0, colon);
  if (kind == "jeffreys" || kind == "flat") {
    throw UnsupportedError("improper priors are not supported: the posterior stays improper");
  }
  if (colon == std::string::npos) {
    throw ValidationError("prior spec '" + text + "' must look like kind:params");
  }
  const auto values = parse_numbers(text.substr(colon + 1));
  PriorSpec p;
  if (kind == "normal") {
    if (values.size() != 2) throw ValidationError("normal prior takes MU,SIGMA2");
    p = PriorSpec::normal(values[0], values[1]);
  } else if (kind == "conjugate") {
    if (values.empty()) throw ValidationError("conjugate prior takes N0[,X0...]");
    Vector x0(values.begin() + 1, values.end());
    if (x0.empty()) {
      if (!statistic) throw ValidationError("conjugate prior without X0 needs a statistic");
      x0 = statistic->null_mean;
    }
    p = PriorSpec::conjugate(values[0], std::move(x0));
  } else if (kind == "gamma") {
    if (values.size() != 2) throw ValidationError("gamma prior takes ALPHA,BETA");
    p = PriorSpec::gamma(values[0], values[1]);
  } else {
    throw ValidationError("unknown prior kind '" + kind + "'");
  }
  p.validate(statistic);
  return p;
}

std::string to_string(const PriorSpec& prior) {
  // Shortest round-trip text, so "normal:0,0.1" reads back as written.
  auto fmt = [](double x) {
    char buf[32];
    return std::string(buf, std::to_chars(buf, buf + sizeof buf, x).ptr);
  };
  std::string out;
  switch (prior.kind) {
    case PriorKind::normal:
      out = "normal:" + fmt(prior.mu.front()) + "," + fmt(prior.sigma2);
      break;
    case PriorKind::conjugate:
      out = "conjugate:" + fmt(prior.n0);
      for (double v : prior.x0) out += "," + fmt(v);
      break;
    case PriorKind::gamma:
      out = "gamma:" + fmt(prior.alpha) + "," + fmt(prior.beta);
      break;
  }
  return out;
}

double prior_log_density(const PriorSpec& prior, std::span<const double> theta,
                         const LogPartitionFn& m_eval) {
  switch (prior.kind) {
    case PriorKind::normal: {
      double q = 0.0;
      for (std::size_t i = 0; i < theta.size(); ++i) {
        const double mu = prior.mu.size() == 1 ? prior.mu[0] : prior.mu[i];
        const double d = theta[i] - mu;
        q += d * d;
      }
      const double dim = static_cast<double>(theta.size());
      return -0.5 * dim * std::log(2.0 * M_PI * prior.sigma2) - 0.5 * q / prior.sigma2;
    }
    case PriorKind::conjugate: {
      if (!m_eval) throw RuntimeFailure("conjugate prior density needs m(theta)");
      if (theta.size() != prior.x0.size()) throw ValidationError("theta/x0 dimension mismatch");
      double dot = 0.0;
      for (std::size_t i = 0; i < theta.size(); ++i) dot += prior.x0[i] * theta[i];
      return prior.n0 * dot - prior.n0 * m_eval(theta);
    }
    case PriorKind::gamma: {
      const double lambda = theta[0];
      if (!(lambda > 0.0)) return kNegInf;
      return prior.alpha * std::log(prior.beta) - std::lgamma(prior.alpha) +
             (prior.alpha - 1.0) * std::log(lambda) - prior.beta * lambda;
    }
  }
  return kNegInf;
}

PriorSpec conjugate_posterior_update(const PriorSpec& prior, long count,
                                     std::span<const double> mean_statistic) {
  if (prior.kind != PriorKind::conjugate) {
    throw UnsupportedError("posterior update in closed form needs a conjugate prior");
  }
  if (count < 0) throw ValidationError("sample count must be >= 0");
  if (count == 0) return prior;
  if (mean_statistic.size() != prior.x0.size()) throw ValidationError("Tbar/x0 dimension mismatch");
  const double n0 = prior.n0;
  const double n = static_cast<double>(count);
  Vector x(prior.x0.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = (n0 * prior.x0[i] + n * mean_statistic[i]) / (n0 + n);
  }
  return PriorSpec::conjugate(n0 + n, std::move(x));
}

std::string to_string(N0Strategy s) {
  switch (s) {
    case N0Strategy::fixed_one: return "fixed";
    case N0Strategy::user_supplied: return "user";
    case N0Strategy::sweep: return "sweep";
    case N0Strategy::empirical_bayes: return "empirical-bayes";
    case N0Strategy::vanishing: return "vanishing";
  }
  return "unknown";
}

N0Strategy parse_n0_strategy(const std::string& text) {
  if (text == "fixed") return N0Strategy::fixed_one;
  if (text == "user") return N0Strategy::user_supplied;
  if (text == "sweep") return N0Strategy::sweep;
  if (text == "empirical-bayes") return N0Strategy::empirical_bayes;
  if (text == "vanishing") return N0Strategy::vanishing;
  throw ValidationError("unknown n0 strategy '" + text + "'");
}

std::vector<double> resolve_n0_values(N0Strategy strategy, std::optional<double> user_n0,
                                      const std::vector<double>& sweep) {
  switch (strategy) {
    case N0Strategy::fixed_one:
      return {1.0};
    case N0Strategy::user_supplied:
      if (!user_n0 || !(*user_n0 > 0.0)) throw ValidationError("n0 strategy 'user' needs n0 > 0");
      return {*user_n0};
    case N0Strategy::sweep:
      if (sweep.empty()) throw ValidationError("n0 strategy 'sweep' needs a non-empty grid");
      for (double v : sweep) {
        if (!(v > 0.0)) throw ValidationError("n0 sweep values must be > 0");
      }
      return sweep;
    case N0Strategy::empirical_bayes:
      throw UnsupportedError("empirical-Bayes estimation of n0 is not implemented");
    case N0Strategy::vanishing:
      throw UnsupportedError("the n0 -> 0 limit is not implemented");
  }
  throw std::logic_error("unhandled n0 strategy");
}

double n0_for_prior_weight(long count, double weight) {
  if (!(weight > 0.0 && weight < 1.0)) throw ValidationError("prior weight must be in (0, 1)");
  if (count < 1) throw ValidationError("imaginary sample size must be >= 1");
  return weight * static_cast<double>(count) / (1.0 - weight);
}

}  // namespace mixcheck
