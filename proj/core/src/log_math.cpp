#include "mixcheck/log_math.hpp"

#include <algorithm>
#include <stdexcept>

namespace mixcheck {

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return kNegInf;
  const double hi = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(hi)) return hi;
  CompensatedSum acc;
  for (double v : values) acc.add(std::exp(v - hi));
  return hi + std::log(acc.value());
}

SignedLog signed_log_sum_exp(std::span<const double> log_abs, std::span<const int> signs) {
  if (log_abs.size() != signs.size()) throw std::invalid_argument("signed_log_sum_exp: size mismatch");
  double hi = kNegInf;
  for (double v : log_abs) hi = std::max(hi, v);
  if (!std::isfinite(hi)) return {hi, 0};
  CompensatedSum acc;
  for (std::size_t i = 0; i < log_abs.size(); ++i) {
    acc.add(signs[i] * std::exp(log_abs[i] - hi));
  }
  const double s = acc.value();
  if (s == 0.0) return {kNegInf, 0};
  return {hi + std::log(std::abs(s)), s > 0 ? 1 : -1};
}

double log_factorial(long n) {
  if (n < 0) throw std::invalid_argument("log_factorial: negative argument");
  return std::lgamma(static_cast<double>(n) + 1.0);
}

double log_binomial(long n, long k) {
  if (k < 0 || k > n) return kNegInf;
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

}  // namespace mixcheck
