#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mixcheck/expfam.hpp"
#include "mixcheck/samplers.hpp"

namespace mixcheck {

struct LogZEstimate {
  double log_z = 0.0;
  double std_error = 0.0;
};

/// log Z(theta) = log n! + log((1/M) sum_i e^{theta . T(sigma_i)}) with
/// sigma_i uniform. Stderr by the delta method. Throws RuntimeFailure when
/// the effective sample size of the weights falls below 10.
LogZEstimate importance_log_Z(const StatisticSpec& statistic, std::span<const double> theta,
                              long samples, std::uint64_t seed);

struct ThermodynamicOptions {
  int grid_points = 21;  // odd, >= 5
  ChainConfig chain{20000, 2000, 0.0, 0, 1, false};
  int threads = 1;
};

struct ThermodynamicResult {
  double log_z = 0.0;
  double std_error = 0.0;
  /// |S_h - S_2h| / 15, when the halved grid is itself a Simpson grid.
  std::optional<double> richardson_error;
  std::vector<double> path;        // s in [0, 1] along the ray
  std::vector<double> integrand;   // theta . E_{s theta}[T]
  std::vector<double> integrand_stderr;
};

/// m(theta) = m(0) + integral_0^1 theta . E_{s theta}[T] ds with Simpson's
/// rule on a uniform grid; each expectation from a Metropolis run on S_n.
ThermodynamicResult thermodynamic_log_Z(const StatisticSpec& statistic,
                                        std::span<const double> theta,
                                        const ThermodynamicOptions& options);

/// log Z tabulated along theta = t * direction, t on a uniform grid.
class NormalizerTable final : public LogPartition {
 public:
  struct Point {
    double t;
    double log_z;
    double std_error;
  };

  NormalizerTable(std::string statistic, int n, NormalizerSource method, std::uint64_t seed,
                  Vector direction, std::vector<Point> grid);

  double log_z(std::span<const double> theta) const override;
  NormalizerSource source() const override { return method_; }
  int dimension() const override { return static_cast<int>(direction_.size()); }

  /// Interpolated log Z at scalar position t (monotone cubic Hermite).
  /// Throws ValidationError outside [t_min, t_max].
  double at(double t) const;
  double derivative(double t) const;

  const std::string& statistic() const noexcept { return statistic_; }
  int n() const noexcept { return n_; }
  NormalizerSource method() const noexcept { return method_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const Vector& direction() const noexcept { return direction_; }
  const std::vector<Point>& grid() const noexcept { return grid_; }
  double t_min() const { return grid_.front().t; }
  double t_max() const { return grid_.back().t; }

  /// Interior points whose second difference is below -3 combined stderrs.
  std::vector<std::size_t> convexity_violations(double sigmas = 3.0) const;

  /// Thermodynamic tables: largest step-halving error estimate over the grid.
  std::optional<double> richardson_error() const noexcept { return richardson_error_; }
  void set_richardson_error(std::optional<double> e) { richardson_error_ = e; }

 private:
  std::string statistic_;
  int n_;
  NormalizerSource method_;
  std::uint64_t seed_;
  Vector direction_;
  std::vector<Point> grid_;
  std::vector<double> slopes_;
  std::optional<double> richardson_error_;
};

struct TableOptions {
  long importance_samples = 100000;
  ChainConfig chain{20000, 2000, 0.0, 0, 1, false};
  int threads = 1;
  Vector direction;  // d > 1 only; defaults to the first axis
};

/// Tabulate log Z on `resolution` evenly spaced points over [lo, hi].
/// log Z(0) is anchored at log n! whenever 0 is a grid point.
/// exact: fixed-points statistic only. importance: one independent estimate
/// per point. thermodynamic: E_t[T] per point, integrated outward from the
/// anchor at 0 with an end-corrected trapezoid rule (requires 0 on the grid).
NormalizerTable build_table(const StatisticSpec& statistic, double lo, double hi,
                            int resolution, NormalizerSource method, std::uint64_t seed,
                            const TableOptions& options = {});

std::string to_json(const NormalizerTable& table);
NormalizerTable table_from_json(const std::string& text);

inline constexpr int kNormalizerTableVersion = 1;

}  // namespace mixcheck
