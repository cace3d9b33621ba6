#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "mixcheck/permutation.hpp"

namespace mixcheck {

using BigInt = boost::multiprecision::cpp_int;

/// D_m, the number of derangements of m items.
BigInt derangements(int m);

/// Natural log of a positive big integer; -inf for zero.
double log_of(const BigInt& x);

BigInt factorial(int n);

/// c_n(j) = #{sigma in S_n : F(sigma) = j} for j = 0..n.
struct FixedPointCounts {
  int n = 0;
  std::vector<BigInt> counts;
  std::vector<double> log_counts;  // -inf where counts[j] == 0

  BigInt total() const;
};

/// c_n(j) = C(n, j) * D_{n-j}.
FixedPointCounts fixed_point_counts(int n);

/// log sum_j c_n(j) e^{theta j}, the log partition function of
/// P_theta(sigma) proportional to e^{theta F(sigma)}.
///
/// Computed from the level sets and cross-checked against the alternating
/// closed form n! sum_{j=0}^n (e^theta - 1)^j / j!; throws std::logic_error
/// if the two disagree beyond 1e-9 relative.
double exact_log_Z(int n, double theta);
double exact_log_Z(const FixedPointCounts& counts, double theta);

/// The closed form route only.
double exact_log_Z_closed_form(int n, double theta);

double poisson_pmf(double lambda, long j);
double log_poisson_pmf(double lambda, long j);

/// Law of k random-transposition steps from the identity, over all of S_n.
class ExactWalkDistribution {
 public:
  static constexpr int kMaxN = 7;

  ExactWalkDistribution(int n, long k, std::vector<double> probs);

  int n() const noexcept { return n_; }
  long k() const noexcept { return k_; }
  /// Indexed by lehmer_rank.
  const std::vector<double>& probabilities() const noexcept { return probs_; }
  double probability(const Permutation& sigma) const;

  /// Law of the fixed-point count, index j = 0..n.
  std::vector<double> fixed_point_law() const;

 private:
  int n_;
  long k_;
  std::vector<double> probs_;
};

/// Q^{*k} by dynamic programming over S_n; rejects n > 7.
ExactWalkDistribution exact_walk_distribution(int n, long k);

/// Every k from 0 to k_max in one pass; element k is Q^{*k}.
std::vector<ExactWalkDistribution> exact_walk_distributions(int n, long k_max);

/// (1/2) sum_sigma |p(sigma) - 1/n!|.
double total_variation_to_uniform(const ExactWalkDistribution& p);

/// Writes "j,count" rows for audit.
void write_fixed_point_counts_csv(std::ostream& out, const FixedPointCounts& c);

}  // namespace mixcheck
