#pragma once

#include <cmath>
#include <limits>
#include <span>

namespace mixcheck {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// log(sum(exp(v))) without overflow. Returns -inf for an empty span.
double log_sum_exp(std::span<const double> values);

/// Signed variant: log|sum(sign_i * exp(v_i))| together with the sign of the sum.
struct SignedLog {
  double log_abs;
  int sign;
};
SignedLog signed_log_sum_exp(std::span<const double> log_abs,
                             std::span<const int> signs);

double log_factorial(long n);
double log_binomial(long n, long k);

}  // namespace mixcheck
