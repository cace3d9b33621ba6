#include "mixcheck/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mixcheck/log_math.hpp"

namespace mixcheck {

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  CompensatedSum s;
  for (double v : x) s.add(v);
  return s.value() / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  CompensatedSum s;
  for (double v : x) s.add((v - m) * (v - m));
  return s.value() / static_cast<double>(x.size() - 1);
}

double effective_sample_size(std::span<const double> x) {
  const auto n = x.size();
  if (n < 4) return static_cast<double>(n);
  const double m = mean(x);
  double c0 = 0.0;
  for (double v : x) c0 += (v - m) * (v - m);
  c0 /= static_cast<double>(n);
  if (c0 <= 0.0) return 1.0;

  auto autocorr = [&](std::size_t lag) {
    double c = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) c += (x[i] - m) * (x[i + lag] - m);
    return c / static_cast<double>(n) / c0;
  };

  // Geyer's initial monotone positive sequence.
  double tau = -1.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    double pair = autocorr(2 * k) + autocorr(2 * k + 1);
    if (pair <= 0.0) break;
    pair = std::min(pair, prev_pair);
    tau += 2.0 * pair;
    prev_pair = pair;
  }
  tau = std::max(tau, 1.0 / std::log10(static_cast<double>(n) + 10.0));
  return static_cast<double>(n) / tau;
}

double split_rhat(const std::vector<std::vector<double>>& chains) {
  std::vector<std::vector<double>> halves;
  for (const auto& c : chains) {
    const auto h = c.size() / 2;
    if (h < 2) continue;
    halves.emplace_back(c.begin(), c.begin() + static_cast<long>(h));
    halves.emplace_back(c.end() - static_cast<long>(h), c.end());
  }
  if (halves.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  std::size_t len = halves.front().size();
  for (const auto& h : halves) len = std::min(len, h.size());
  const double n = static_cast<double>(len);
  const double m = static_cast<double>(halves.size());
  std::vector<double> means;
  double w = 0.0;
  for (auto& h : halves) {
    h.resize(len);
    means.push_back(mean(h));
    w += sample_variance(h);
  }
  w /= m;
  const double b = n * sample_variance(means);
  if (w <= 0.0) return b <= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  const double var_plus = (n - 1.0) / n * w + b / n;
  return std::sqrt(var_plus / w);
}

double split_rhat(std::span<const double> x) {
  return split_rhat(std::vector<std::vector<double>>{std::vector<double>(x.begin(), x.end())});
}

double batch_means_stderr(std::span<const double> x, int batches) {
  if (batches < 2) throw std::invalid_argument("batch_means_stderr: need >= 2 batches");
  const auto size = x.size() / static_cast<std::size_t>(batches);
  if (size == 0) return std::sqrt(sample_variance(x) / std::max<std::size_t>(x.size(), 1));
  std::vector<double> means;
  for (int b = 0; b < batches; ++b) {
    means.push_back(mean(x.subspan(static_cast<std::size_t>(b) * size, size)));
  }
  return std::sqrt(sample_variance(means) / static_cast<double>(batches));
}

}  // namespace mixcheck
