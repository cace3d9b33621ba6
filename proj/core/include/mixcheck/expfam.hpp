#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mixcheck/combinatorics.hpp"
#include "mixcheck/statistics.hpp"

namespace mixcheck {

/// Row-major dense matrix, sized d x d for covariance results.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r * c), 0.0) {}
  double& operator()(int i, int j) { return data[static_cast<std::size_t>(i * cols + j)]; }
  double operator()(int i, int j) const { return data[static_cast<std::size_t>(i * cols + j)]; }
};

enum class NormalizerSource { exact, importance, thermodynamic };

std::string to_string(NormalizerSource s);
NormalizerSource parse_normalizer_source(const std::string& text);

/// m(theta) = log sum_x e^{theta . T(x)} for one statistic and deck size.
class LogPartition {
 public:
  virtual ~LogPartition() = default;
  virtual double log_z(std::span<const double> theta) const = 0;
  virtual NormalizerSource source() const = 0;
  virtual int dimension() const = 0;
};

using LogPartitionFn = std::function<double(std::span<const double>)>;

/// Exact m(theta) for the fixed-point statistic from level-set counts.
class ExactFixedPointPartition final : public LogPartition {
 public:
  explicit ExactFixedPointPartition(int n);

  double log_z(std::span<const double> theta) const override;
  NormalizerSource source() const override { return NormalizerSource::exact; }
  int dimension() const override { return 1; }

  int n() const noexcept { return counts_.n; }
  const FixedPointCounts& counts() const noexcept { return counts_; }

  /// Normalized level probabilities P_theta(F = j), j = 0..n.
  std::vector<double> level_probabilities(double theta) const;
  double mean(double theta) const;
  double variance(double theta) const;

 private:
  FixedPointCounts counts_;
};

/// P_theta(x) = exp(theta . T(x) - m(theta)) on S_n.
class ExpFamilyModel {
 public:
  ExpFamilyModel(StatisticSpec statistic, Vector theta,
                 std::shared_ptr<const LogPartition> normalizer = nullptr);

  const StatisticSpec& statistic() const noexcept { return statistic_; }
  int n() const noexcept { return statistic_.n; }
  const Vector& theta() const noexcept { return theta_; }
  bool has_normalizer() const noexcept { return normalizer_ != nullptr; }
  const LogPartition* normalizer() const noexcept { return normalizer_.get(); }

  /// theta . T(sigma), the unnormalized log weight.
  double log_weight(const Permutation& sigma) const;

  /// m(theta); theta = 0 gives log n! without consulting the normalizer.
  /// Throws RuntimeFailure when no normalizer is attached.
  double log_partition() const;

  double log_density(const Permutation& sigma) const;

 private:
  StatisticSpec statistic_;
  Vector theta_;
  std::shared_ptr<const LogPartition> normalizer_;
};

/// Normalizer for the model's statistic, if an exact one exists (fixed points).
std::shared_ptr<const LogPartition> exact_partition_for(const StatisticSpec& statistic);

/// grad m(theta) = E_theta[T]. Exact for the fixed-point statistic, and for
/// every statistic at theta = 0 via its null mean. Other cases need sampling
/// (see estimate_mean_parameter) and raise RuntimeFailure here.
Vector mean_parameter(const ExpFamilyModel& model);

/// Hessian of m = Cov_theta(T). Exact for the fixed-point statistic only.
Matrix covariance_parameter(const ExpFamilyModel& model);

// ---------------------------------------------------------------------------
// Priors

enum class PriorKind { conjugate, normal, gamma };

/// conjugate(n0, x0): density proportional to exp(n0 x0 . theta - n0 m(theta)).
/// normal(mu, sigma2): isotropic, sigma2 is a variance.
/// gamma(alpha, beta): shape/rate density on a positive rate parameter.
struct PriorSpec {
  PriorKind kind = PriorKind::normal;
  double n0 = 1.0;
  Vector x0;
  Vector mu{0.0};
  double sigma2 = 0.1;
  double alpha = 1.0;
  double beta = 1.0;

  static PriorSpec conjugate(double n0, Vector x0);
  static PriorSpec normal(Vector mu, double sigma2);
  static PriorSpec normal(double mu, double sigma2) { return normal(Vector{mu}, sigma2); }
  static PriorSpec gamma(double alpha, double beta);

  /// Checks parameter signs; for conjugate priors with a statistic also
  /// checks that x0 lies in the open value hull.
  void validate(const StatisticSpec* statistic = nullptr) const;
};

/// Grammar: "normal:MU,SIGMA2", "conjugate:N0,X0[,X0...]", "gamma:ALPHA,BETA".
/// "conjugate:N0" (no X0) centers at the statistic's null mean when the
/// statistic is given.
PriorSpec parse_prior(const std::string& text, const StatisticSpec* statistic = nullptr);
std::string to_string(const PriorSpec& prior);

/// Unnormalized log prior density. Conjugate priors need `m_eval`.
/// For gamma priors theta[0] is the rate; theta <= 0 gives -inf.
double prior_log_density(const PriorSpec& prior, std::span<const double> theta,
                         const LogPartitionFn& m_eval = nullptr);

struct PosteriorSpec {
  PriorSpec prior;
  long count = 0;
  Vector mean_statistic;
};

/// (n0, x0) -> (n0 + N, (n0 x0 + N Tbar) / (n0 + N)).
PriorSpec conjugate_posterior_update(const PriorSpec& prior, long count,
                                     std::span<const double> mean_statistic);

// ---------------------------------------------------------------------------
// Choosing n0

enum class N0Strategy { fixed_one, user_supplied, sweep, empirical_bayes, vanishing };

std::string to_string(N0Strategy s);
N0Strategy parse_n0_strategy(const std::string& text);

/// The n0 values a run should use. empirical_bayes and vanishing are not
/// implemented and throw UnsupportedError.
std::vector<double> resolve_n0_values(N0Strategy strategy, std::optional<double> user_n0,
                                      const std::vector<double>& sweep);

/// n0 that gives the prior mean weight w in the posterior mean after N
/// observations: n0 / (n0 + N) = w.
double n0_for_prior_weight(long count, double weight);

}  // namespace mixcheck
