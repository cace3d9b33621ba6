#include "mixcheck/combinatorics.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "mixcheck/error.hpp"
#include "mixcheck/log_math.hpp"
#include "mixcheck/statistics.hpp"

namespace mixcheck {

BigInt derangements(int m) {
  if (m < 0) throw ValidationError("derangements: m must be >= 0");
  BigInt prev2 = 1;  // D_0
  if (m == 0) return prev2;
  BigInt prev1 = 0;  // D_1
  for (int i = 2; i <= m; ++i) {
    BigInt next = BigInt(i - 1) * (prev1 + prev2);
    prev2 = std::move(prev1);
    prev1 = std::move(next);
  }
  return prev1;
}

BigInt factorial(int n) {
  if (n < 0) throw ValidationError("factorial: n must be >= 0");
  BigInt f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double log_of(const BigInt& x) {
  if (x <= 0) return kNegInf;
  const auto bits = static_cast<long>(boost::multiprecision::msb(x));
  if (bits < 1000) return std::log(x.convert_to<double>());
  const long shift = bits - 60;
  const BigInt top = x >> shift;
  return std::log(top.convert_to<double>()) + static_cast<double>(shift) * std::log(2.0);
}

BigInt FixedPointCounts::total() const {
  BigInt t = 0;
  for (const auto& c : counts) t += c;
  return t;
}

FixedPointCounts fixed_point_counts(int n) {
  if (n < 1) throw ValidationError("fixed_point_counts: n must be >= 1");
  FixedPointCounts out;
  out.n = n;
  out.counts.resize(static_cast<std::size_t>(n) + 1);
  out.log_counts.resize(static_cast<std::size_t>(n) + 1);
  std::vector<BigInt> d(static_cast<std::size_t>(n) + 1);
  d[0] = 1;
  if (n >= 1) d[1] = 0;
  for (int i = 2; i <= n; ++i) {
    d[static_cast<std::size_t>(i)] = BigInt(i - 1) * (d[static_cast<std::size_t>(i - 1)] + d[static_cast<std::size_t>(i - 2)]);
  }
  BigInt binom = 1;  // C(n, j)
  for (int j = 0; j <= n; ++j) {
    if (j > 0) binom = binom * (n - j + 1) / j;
    const auto idx = static_cast<std::size_t>(j);
    out.counts[idx] = binom * d[static_cast<std::size_t>(n - j)];
    out.log_counts[idx] = log_of(out.counts[idx]);
  }
  return out;
}

double exact_log_Z_closed_form(int n, double theta) {
  if (n < 1) throw ValidationError("exact_log_Z: n must be >= 1");
  if (!std::isfinite(theta)) throw ValidationError("exact_log_Z: theta must be finite");
  const double x_minus_1 = std::expm1(theta);
  if (x_minus_1 == 0.0) return log_factorial(n);
  const double log_abs = std::log(std::abs(x_minus_1));
  const bool negative = x_minus_1 < 0.0;
  std::vector<double> logs(static_cast<std::size_t>(n) + 1);
  std::vector<int> signs(static_cast<std::size_t>(n) + 1);
  for (int j = 0; j <= n; ++j) {
    logs[static_cast<std::size_t>(j)] = j * log_abs - log_factorial(j);
    signs[static_cast<std::size_t>(j)] = (negative && (j % 2 == 1)) ? -1 : 1;
  }
  const auto s = signed_log_sum_exp(logs, signs);
  if (s.sign <= 0) throw std::logic_error("exact_log_Z: closed form lost positivity");
  return log_factorial(n) + s.log_abs;
}

double exact_log_Z(const FixedPointCounts& counts, double theta) {
  if (!std::isfinite(theta)) throw ValidationError("exact_log_Z: theta must be finite");
  std::vector<double> terms(counts.log_counts.size());
  for (std::size_t j = 0; j < terms.size(); ++j) {
    terms[j] = counts.log_counts[j] + theta * static_cast<double>(j);
  }
  return log_sum_exp(terms);
}

double exact_log_Z(int n, double theta) {
  static thread_local FixedPointCounts cache;
  if (cache.n != n) cache = fixed_point_counts(n);
  const double level = exact_log_Z(cache, theta);
  const double closed = exact_log_Z_closed_form(n, theta);
  const double scale = std::max(1.0, std::abs(level));
  if (std::abs(level - closed) > 1e-9 * scale) {
    throw std::logic_error("exact_log_Z: level-set and closed-form routes disagree");
  }
  return level;
}

double log_poisson_pmf(double lambda, long j) {
  if (!(lambda > 0.0)) throw ValidationError("poisson rate must be > 0");
  if (j < 0) return kNegInf;
  return static_cast<double>(j) * std::log(lambda) - lambda - log_factorial(j);
}

double poisson_pmf(double lambda, long j) { return std::exp(log_poisson_pmf(lambda, j)); }

ExactWalkDistribution::ExactWalkDistribution(int n, long k, std::vector<double> probs)
    : n_(n), k_(k), probs_(std::move(probs)) {}

double ExactWalkDistribution::probability(const Permutation& sigma) const {
  if (sigma.size() != n_) throw ValidationError("permutation size does not match distribution");
  return probs_[static_cast<std::size_t>(lehmer_rank(sigma))];
}

std::vector<double> ExactWalkDistribution::fixed_point_law() const {
  std::vector<double> law(static_cast<std::size_t>(n_) + 1, 0.0);
  for (std::size_t r = 0; r < probs_.size(); ++r) {
    law[static_cast<std::size_t>(fixed_points(lehmer_unrank(n_, r)))] += probs_[r];
  }
  return law;
}

std::vector<ExactWalkDistribution> exact_walk_distributions(int n, long k_max) {
  if (n < 1 || n > ExactWalkDistribution::kMaxN) {
    throw ValidationError("exact_walk_distribution supports 1 <= n <= 7");
  }
  if (k_max < 0) throw ValidationError("number of steps must be >= 0");
  std::size_t states = 1;
  for (int i = 2; i <= n; ++i) states *= static_cast<std::size_t>(i);

  // neighbour[r * pairs + p] = rank after swapping the p-th position pair.
  std::vector<std::pair<int, int>> pairs;
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) pairs.emplace_back(i, j);
  std::vector<std::uint32_t> neighbour(states * pairs.size());
  for (std::size_t r = 0; r < states; ++r) {
    const auto sigma = lehmer_unrank(n, r);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      auto tau = sigma;
      tau.swap_positions(pairs[p].first, pairs[p].second);
      neighbour[r * pairs.size() + p] = static_cast<std::uint32_t>(lehmer_rank(tau));
    }
  }

  const double stay = 1.0 / n;
  const double move = 2.0 / (static_cast<double>(n) * n);
  std::vector<double> cur(states, 0.0);
  cur[0] = 1.0;  // rank 0 is the identity
  std::vector<ExactWalkDistribution> out;
  out.reserve(static_cast<std::size_t>(k_max) + 1);
  out.emplace_back(n, 0, cur);
  std::vector<double> next(states);
  for (long k = 1; k <= k_max; ++k) {
    for (std::size_t r = 0; r < states; ++r) {
      double acc = stay * cur[r];
      for (std::size_t p = 0; p < pairs.size(); ++p) acc += move * cur[neighbour[r * pairs.size() + p]];
      next[r] = acc;
    }
    cur.swap(next);
    out.emplace_back(n, k, cur);
  }
  return out;
}

ExactWalkDistribution exact_walk_distribution(int n, long k) {
  auto all = exact_walk_distributions(n, k);
  return std::move(all.back());
}

double total_variation_to_uniform(const ExactWalkDistribution& p) {
  const double u = 1.0 / static_cast<double>(p.probabilities().size());
  CompensatedSum acc;
  for (double x : p.probabilities()) acc.add(std::abs(x - u));
  return 0.5 * acc.value();
}

void write_fixed_point_counts_csv(std::ostream& out, const FixedPointCounts& c) {
  out << "j,count\n";
  for (std::size_t j = 0; j < c.counts.size(); ++j) out << j << "," << c.counts[j] << "\n";
}

}  // namespace mixcheck
