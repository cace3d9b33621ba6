#include "mixcheck/chi_square.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "mixcheck/error.hpp"
#include "mixcheck/rng.hpp"

namespace mixcheck {

ExpectedModel ExpectedModel::uniform(int cells) {
  if (cells < 2) throw ValidationError("uniform model needs at least 2 cells");
  return {Kind::uniform, 0.0, std::vector<double>(static_cast<std::size_t>(cells), 1.0 / cells)};
}

ExpectedModel ExpectedModel::explicit_probs(std::vector<double> p) {
  if (p.size() < 2) throw ValidationError("explicit model needs at least 2 probabilities");
  double s = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("probabilities must be finite and >= 0");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-6) throw ValidationError("explicit probabilities must sum to 1");
  for (double& v : p) v /= s;
  return {Kind::explicit_probs, 0.0, std::move(p)};
}

namespace {

double parse_number(const std::string& text, const std::string& context) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw ValidationError("malformed number '" + text + "' in '" + context + "'");
}

}  // namespace

ExpectedModel parse_expected_model(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (kind == "poisson") {
    const double lambda = rest.empty() ? 1.0 : parse_number(rest, text);
    if (!(lambda > 0.0)) throw ValidationError("Poisson mean must be > 0");
    return ExpectedModel::poisson(lambda);
  }
  if (kind == "uniform") {
    const double k = parse_number(rest, text);
    if (k != std::floor(k)) throw ValidationError("uniform cell count must be an integer");
    return ExpectedModel::uniform(static_cast<int>(k));
  }
  if (kind == "explicit") {
    std::vector<double> p;
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ',')) p.push_back(parse_number(item, text));
    return ExpectedModel::explicit_probs(std::move(p));
  }
  throw ValidationError("unknown expected model '" + text + "' (poisson:L, uniform:K, explicit:p,...)");
}

namespace {

/// P(value = v) under the model, and the upper tail P(value >= v).
struct CellLaw {
  const ExpectedModel& model;

  double pmf(long v) const {
    if (model.kind == ExpectedModel::Kind::poisson) {
      return std::exp(v * std::log(model.lambda) - model.lambda - std::lgamma(v + 1.0));
    }
    return v < static_cast<long>(model.probs.size()) ? model.probs[static_cast<std::size_t>(v)] : 0.0;
  }
  double tail(long v) const {
    if (model.kind == ExpectedModel::Kind::poisson) {
      if (v <= 0) return 1.0;
      return boost::math::gamma_p(static_cast<double>(v), model.lambda);
    }
    double s = 0.0;
    for (auto i = static_cast<std::size_t>(std::max(0L, v)); i < model.probs.size(); ++i) s += model.probs[i];
    return s;
  }
  bool finite() const { return model.kind != ExpectedModel::Kind::poisson; }
  long support() const { return static_cast<long>(model.probs.size()); }
};

std::string model_name(const ExpectedModel& m) {
  std::ostringstream os;
  switch (m.kind) {
    case ExpectedModel::Kind::poisson: os << "poisson:" << m.lambda; break;
    case ExpectedModel::Kind::uniform: os << "uniform:" << m.probs.size(); break;
    case ExpectedModel::Kind::explicit_probs: os << "explicit:" << m.probs.size(); break;
  }
  return os.str();
}

double pearson(std::span<const long> observed, std::span<const double> expected) {
  double x = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double d = static_cast<double>(observed[i]) - expected[i];
    x += d * d / expected[i];
  }
  return x;
}

}  // namespace

ChiSquareReport chi_square_test(std::span<const long> observed_by_value, const ExpectedModel& model,
                                const ChiSquareOptions& options) {
  long total = 0;
  for (long c : observed_by_value) {
    if (c < 0) throw ValidationError("observed counts must be >= 0");
    total += c;
  }
  if (total == 0) throw ValidationError("chi-square test needs at least one observation");
  const CellLaw law{model};
  const auto observed_len = static_cast<long>(observed_by_value.size());
  if (law.finite()) {
    for (long v = law.support(); v < observed_len; ++v) {
      if (observed_by_value[static_cast<std::size_t>(v)] > 0) {
        throw ValidationError("observed value " + std::to_string(v) + " is outside the model support");
      }
    }
  }

  // Values below `tail_start` are separate cells; the rest form one tail cell.
  long tail_start = options.lump_threshold >= 0 ? options.lump_threshold
                                                : std::max(observed_len, 1L);
  if (law.finite()) tail_start = std::min(tail_start, law.support());
  const double n = static_cast<double>(total);
  while (tail_start > 1 && n * law.tail(tail_start) < options.min_expected) --tail_start;

  ChiSquareReport r;
  r.lump_threshold = options.lump_threshold;
  r.min_expected = options.min_expected;
  r.model = model_name(model);
  auto observed_at = [&](long v) {
    return v < observed_len ? observed_by_value[static_cast<std::size_t>(v)] : 0L;
  };
  for (long v = 0; v < tail_start; ++v) {
    r.categories.push_back(std::to_string(v));
    r.observed.push_back(observed_at(v));
    r.probabilities.push_back(law.pmf(v));
  }
  const double tail_p = law.tail(tail_start);
  const bool has_tail = !law.finite() || tail_start < law.support();
  if (has_tail) {
    long tail_obs = 0;
    for (long v = tail_start; v < observed_len; ++v) tail_obs += observed_at(v);
    r.categories.push_back(">=" + std::to_string(tail_start));
    r.observed.push_back(tail_obs);
    r.probabilities.push_back(tail_p);
  }
  for (double p : r.probabilities) {
    if (!(p > 0.0)) throw ValidationError("a category has zero expected count after lumping");
    r.expected.push_back(n * p);
  }
  if (r.categories.size() < 2) throw ValidationError("chi-square test needs at least two categories");

  r.statistic = pearson(r.observed, r.expected);
  r.df = static_cast<int>(r.categories.size()) - 1;
  r.p_value = chi_square_survival(r.statistic, r.df);
  std::ostringstream conv;
  conv << "cells 0.." << tail_start - 1;
  if (has_tail) conv << " and >=" << tail_start;
  conv << " (lump threshold " << options.lump_threshold << ", min expected " << options.min_expected
       << "); df = cells - 1";
  r.convention = conv.str();
  return r;
}

double chi_square_survival(double x, int df) {
  if (df < 1) throw ValidationError("chi-square df must be >= 1");
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(df / 2.0, x / 2.0);
}

double chi_square_upper_quantile(int df, double alpha) {
  if (df < 1) throw ValidationError("chi-square df must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  return 2.0 * boost::math::gamma_q_inv(df / 2.0, alpha);
}

double simulated_p_value(const ChiSquareReport& report, long draws, std::uint64_t seed) {
  if (draws < 1) throw ValidationError("simulated p-value needs draws >= 1");
  const long total = std::accumulate(report.observed.begin(), report.observed.end(), 0L);
  auto rng = make_engine(derive_seed(seed, SeedStream::simulation, 0));
  const auto k = report.probabilities.size();
  std::vector<long> counts(k);
  const double threshold = report.statistic * (1.0 - 1e-12);
  long hits = 0;
  for (long d = 0; d < draws; ++d) {
    long left = total;
    double mass = 1.0;
    for (std::size_t i = 0; i + 1 < k; ++i) {
      const double p = mass > 0.0 ? std::min(1.0, report.probabilities[i] / mass) : 0.0;
      counts[i] = left > 0 ? std::binomial_distribution<long>(left, p)(rng) : 0;
      left -= counts[i];
      mass -= report.probabilities[i];
    }
    counts[k - 1] = left;
    if (pearson(counts, report.expected) >= threshold) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(draws);
}

}  // namespace mixcheck
