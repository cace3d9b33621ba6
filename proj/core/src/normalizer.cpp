#include "mixcheck/normalizer.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "mixcheck/diagnostics.hpp"
#include "mixcheck/error.hpp"
#include "mixcheck/log_math.hpp"
#include "mixcheck/shuffle.hpp"

namespace mixcheck {

namespace {

constexpr double kMinImportanceEss = 10.0;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

bool all_zero(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

void check_theta(const StatisticSpec& statistic, std::span<const double> theta) {
  if (static_cast<int>(theta.size()) != statistic.dimension) {
    throw ValidationError("theta dimension does not match statistic '" + statistic.name + "'");
  }
  for (double v : theta) {
    if (!std::isfinite(v)) throw ValidationError("theta must be finite");
  }
}

}  // namespace

LogZEstimate importance_log_Z(const StatisticSpec& statistic, std::span<const double> theta,
                              long samples, std::uint64_t seed) {
  check_theta(statistic, theta);
  if (samples < 1000) throw ValidationError("importance sampling needs at least 1000 samples");
  const double log_n_fact = log_factorial(statistic.n);
  if (all_zero(theta)) return {log_n_fact, 0.0};

  auto rng = make_engine(seed);
  std::vector<double> log_w(static_cast<std::size_t>(samples));
  for (auto& lw : log_w) lw = dot(theta, statistic(uniform_permutation(statistic.n, rng)));

  const double hi = *std::max_element(log_w.begin(), log_w.end());
  CompensatedSum s1;
  CompensatedSum s2;
  for (double lw : log_w) {
    const double e = std::exp(lw - hi);
    s1.add(e);
    s2.add(e * e);
  }
  const double sum = s1.value();
  const double sum_sq = s2.value();
  const double ess = sum * sum / sum_sq;
  if (ess < kMinImportanceEss) {
    throw RuntimeFailure("importance weights degenerate (effective sample size " +
                         std::to_string(ess) + " < 10); use the thermodynamic route");
  }
  const double m = static_cast<double>(samples);
  const double mean_w = sum / m;
  const double var_w = std::max(0.0, (sum_sq / m - mean_w * mean_w) * m / (m - 1.0));
  LogZEstimate est;
  est.log_z = log_n_fact + hi + std::log(mean_w);
  est.std_error = std::sqrt(var_w / m) / mean_w;
  return est;
}

ThermodynamicResult thermodynamic_log_Z(const StatisticSpec& statistic,
                                        std::span<const double> theta,
                                        const ThermodynamicOptions& options) {
  check_theta(statistic, theta);
  const int g = options.grid_points;
  if (g < 5 || g % 2 == 0) throw ValidationError("thermodynamic integration needs an odd grid of >= 5 points");
  ThermodynamicResult res;
  const double log_n_fact = log_factorial(statistic.n);
  if (all_zero(theta)) {
    res.log_z = log_n_fact;
    res.richardson_error = 0.0;
    return res;
  }
  res.path.resize(static_cast<std::size_t>(g));
  res.integrand.resize(static_cast<std::size_t>(g));
  res.integrand_stderr.resize(static_cast<std::size_t>(g));
  for (int i = 0; i < g; ++i) res.path[static_cast<std::size_t>(i)] = static_cast<double>(i) / (g - 1);

  res.integrand[0] = dot(theta, statistic.null_mean);
  res.integrand_stderr[0] = 0.0;
  parallel_for(g - 1, options.threads, [&](long k) {
    const auto i = static_cast<std::size_t>(k + 1);
    Vector point(theta.begin(), theta.end());
    for (auto& v : point) v *= res.path[i];
    auto cfg = options.chain;
    cfg.seed = derive_seed(options.chain.seed, SeedStream::normalizer_point, i);
    const auto trace = metropolis_statistic_trace(statistic, point, cfg);
    std::vector<double> projected;
    projected.reserve(trace.values.size());
    for (const auto& t : trace.values) projected.push_back(dot(theta, t));
    res.integrand[i] = mean(projected);
    res.integrand_stderr[i] = batch_means_stderr(projected);
  });

  auto simpson = [&](int stride) {
    const int intervals = (g - 1) / stride;
    const double h = 1.0 / intervals;
    CompensatedSum acc;
    double var = 0.0;
    for (int k = 0; k <= intervals; ++k) {
      const auto i = static_cast<std::size_t>(k * stride);
      const double w = (k == 0 || k == intervals) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
      acc.add(w * res.integrand[i]);
      var += w * w * res.integrand_stderr[i] * res.integrand_stderr[i];
    }
    return std::pair{acc.value() * h / 3.0, std::sqrt(var) * h / 3.0};
  };
  const auto [integral, se] = simpson(1);
  res.log_z = log_n_fact + integral;
  res.std_error = se;
  if ((g - 1) % 4 == 0) {
    const auto coarse = simpson(2).first;
    res.richardson_error = std::abs(integral - coarse) / 15.0;
  }
  return res;
}

// ---------------------------------------------------------------------------

NormalizerTable::NormalizerTable(std::string statistic, int n, NormalizerSource method,
                                 std::uint64_t seed, Vector direction, std::vector<Point> grid)
    : statistic_(std::move(statistic)),
      n_(n),
      method_(method),
      seed_(seed),
      direction_(std::move(direction)),
      grid_(std::move(grid)) {
  if (grid_.size() < 2) throw ValidationError("normalizer table needs at least two grid points");
  if (direction_.empty()) throw ValidationError("normalizer table needs a direction");
  for (std::size_t i = 1; i < grid_.size(); ++i) {
    if (!(grid_[i].t > grid_[i - 1].t)) throw ValidationError("normalizer grid must be strictly increasing");
  }
  // Fritsch-Carlson slopes for a monotone piecewise cubic Hermite interpolant.
  const auto m = grid_.size();
  std::vector<double> h(m - 1), delta(m - 1);
  for (std::size_t i = 0; i + 1 < m; ++i) {
    h[i] = grid_[i + 1].t - grid_[i].t;
    delta[i] = (grid_[i + 1].log_z - grid_[i].log_z) / h[i];
  }
  slopes_.assign(m, 0.0);
  if (m == 2) {
    slopes_[0] = slopes_[1] = delta[0];
    return;
  }
  for (std::size_t i = 1; i + 1 < m; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) {
      slopes_[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      slopes_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  auto end_slope = [](double h0, double h1, double d0, double d1) {
    double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (s * d0 <= 0.0) s = 0.0;
    else if (d0 * d1 <= 0.0 && std::abs(s) > std::abs(3.0 * d0)) s = 3.0 * d0;
    return s;
  };
  slopes_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
  slopes_[m - 1] = end_slope(h[m - 2], h[m - 3], delta[m - 2], delta[m - 3]);
}

namespace {

struct Segment {
  std::size_t i;
  double s;  // position in [0, 1] within the segment
  double h;
};

}  // namespace

double NormalizerTable::at(double t) const {
  const double tol = 1e-12 * std::max(1.0, t_max() - t_min());
  if (!(t >= t_min() - tol && t <= t_max() + tol)) {
    throw ValidationError("theta " + std::to_string(t) + " outside normalizer table range [" +
                          std::to_string(t_min()) + ", " + std::to_string(t_max()) + "]");
  }
  auto it = std::upper_bound(grid_.begin(), grid_.end(), t,
                             [](double v, const Point& p) { return v < p.t; });
  std::size_t i = it == grid_.begin() ? 0 : static_cast<std::size_t>(it - grid_.begin()) - 1;
  if (i >= grid_.size() - 1) i = grid_.size() - 2;
  const double h = grid_[i + 1].t - grid_[i].t;
  const double s = std::clamp((t - grid_[i].t) / h, 0.0, 1.0);
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * grid_[i].log_z + (s3 - 2 * s2 + s) * h * slopes_[i] +
         (-2 * s3 + 3 * s2) * grid_[i + 1].log_z + (s3 - s2) * h * slopes_[i + 1];
}

double NormalizerTable::derivative(double t) const {
  (void)at(t);  // range check
  auto it = std::upper_bound(grid_.begin(), grid_.end(), t,
                             [](double v, const Point& p) { return v < p.t; });
  std::size_t i = it == grid_.begin() ? 0 : static_cast<std::size_t>(it - grid_.begin()) - 1;
  if (i >= grid_.size() - 1) i = grid_.size() - 2;
  const double h = grid_[i + 1].t - grid_[i].t;
  const double s = std::clamp((t - grid_[i].t) / h, 0.0, 1.0);
  const double s2 = s * s;
  return ((6 * s2 - 6 * s) * grid_[i].log_z + (3 * s2 - 4 * s + 1) * h * slopes_[i] +
          (-6 * s2 + 6 * s) * grid_[i + 1].log_z + (3 * s2 - 2 * s) * h * slopes_[i + 1]) /
         h;
}

double NormalizerTable::log_z(std::span<const double> theta) const {
  if (theta.size() != direction_.size()) throw ValidationError("theta dimension does not match table");
  if (direction_.size() == 1) return at(theta[0] / direction_[0]);
  const double uu = dot(direction_, direction_);
  const double t = dot(theta, direction_) / uu;
  double resid = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    resid += std::pow(theta[i] - t * direction_[i], 2);
    norm += theta[i] * theta[i];
  }
  if (std::sqrt(resid) > 1e-9 * std::max(1.0, std::sqrt(norm))) {
    throw ValidationError("theta is not on the tabulated ray");
  }
  return at(t);
}

std::vector<std::size_t> NormalizerTable::convexity_violations(double sigmas) const {
  std::vector<std::size_t> bad;
  for (std::size_t i = 1; i + 1 < grid_.size(); ++i) {
    const double h0 = grid_[i].t - grid_[i - 1].t;
    const double h1 = grid_[i + 1].t - grid_[i].t;
    // Second divided difference scaled to the uniform-grid form.
    const double a = 2.0 / (h0 * (h0 + h1)), b = 2.0 / (h0 * h1), c = 2.0 / (h1 * (h0 + h1));
    const double d2 = a * grid_[i - 1].log_z - b * grid_[i].log_z + c * grid_[i + 1].log_z;
    const double sd = std::sqrt(std::pow(a * grid_[i - 1].std_error, 2) + std::pow(b * grid_[i].std_error, 2) +
                                std::pow(c * grid_[i + 1].std_error, 2));
    if (d2 < -sigmas * sd - 1e-9 * std::max(1.0, std::abs(b * grid_[i].log_z))) bad.push_back(i);
  }
  return bad;
}

NormalizerTable build_table(const StatisticSpec& statistic, double lo, double hi, int resolution,
                            NormalizerSource method, std::uint64_t seed,
                            const TableOptions& options) {
  if (!(lo < hi)) throw ValidationError("theta range must satisfy lo < hi");
  if (resolution < 2) throw ValidationError("table resolution must be >= 2");
  Vector direction = options.direction;
  if (direction.empty()) {
    direction.assign(static_cast<std::size_t>(statistic.dimension), 0.0);
    direction[0] = 1.0;
  }
  if (static_cast<int>(direction.size()) != statistic.dimension) {
    throw ValidationError("table direction dimension does not match statistic");
  }
  const auto m = static_cast<std::size_t>(resolution);
  const double step = (hi - lo) / (resolution - 1);
  std::vector<NormalizerTable::Point> grid(m);
  std::optional<std::size_t> zero_index;
  for (std::size_t i = 0; i < m; ++i) {
    double t = lo + static_cast<double>(i) * step;
    if (std::abs(t) < 1e-9 * step) {
      t = 0.0;
      zero_index = i;
    }
    grid[i].t = t;
  }
  const double log_n_fact = log_factorial(statistic.n);
  std::optional<double> richardson;
  auto theta_at = [&](double t) {
    Vector th = direction;
    for (auto& v : th) v *= t;
    return th;
  };

  switch (method) {
    case NormalizerSource::exact: {
      if (!(statistic.exact_counts && statistic.name == "fixed-points")) {
        throw UnsupportedError("exact normalizer is available only for the fixed-points statistic");
      }
      for (auto& p : grid) {
        p.log_z = p.t == 0.0 ? log_n_fact : exact_log_Z(statistic.n, p.t * direction[0]);
        p.std_error = 0.0;
      }
      break;
    }
    case NormalizerSource::importance: {
      parallel_for(resolution, options.threads, [&](long k) {
        auto& p = grid[static_cast<std::size_t>(k)];
        const auto est = importance_log_Z(statistic, theta_at(p.t), options.importance_samples,
                                          derive_seed(seed, SeedStream::normalizer_point,
                                                      static_cast<std::uint64_t>(k)));
        p.log_z = est.log_z;
        p.std_error = est.std_error;
      });
      break;
    }
    case NormalizerSource::thermodynamic: {
      if (!zero_index) {
        throw ValidationError("thermodynamic tables need theta = 0 on the grid (choose lo, hi, resolution accordingly)");
      }
      // f = u . E_t[T] and f' = Var_t(u . T) at every node.
      std::vector<double> f(m), fprime(m), se(m);
      parallel_for(resolution, options.threads, [&](long k) {
        const auto i = static_cast<std::size_t>(k);
        auto cfg = options.chain;
        cfg.seed = derive_seed(seed, SeedStream::normalizer_point, i);
        const auto trace = metropolis_statistic_trace(statistic, theta_at(grid[i].t), cfg);
        std::vector<double> proj;
        proj.reserve(trace.values.size());
        for (const auto& t : trace.values) proj.push_back(dot(direction, t));
        f[i] = mean(proj);
        fprime[i] = sample_variance(proj);
        se[i] = batch_means_stderr(proj);
      });
      const auto z = *zero_index;
      f[z] = dot(direction, statistic.null_mean);
      se[z] = 0.0;
      grid[z].log_z = log_n_fact;
      grid[z].std_error = 0.0;
      // Trapezoid with the Euler-Maclaurin end correction, outward from 0.
      auto integrate = [&](std::size_t from, std::size_t to) {
        const double h = grid[to].t - grid[from].t;
        return h / 2.0 * (f[from] + f[to]) - h * h / 12.0 * (fprime[to] - fprime[from]);
      };
      double var = 0.0;
      for (std::size_t i = z + 1; i < m; ++i) {
        grid[i].log_z = grid[i - 1].log_z + integrate(i - 1, i);
        const double h = grid[i].t - grid[i - 1].t;
        var += std::pow(h / 2.0 * se[i - 1], 2) + std::pow(h / 2.0 * se[i], 2);
        grid[i].std_error = std::sqrt(var);
      }
      var = 0.0;
      for (std::size_t i = z; i-- > 0;) {
        grid[i].log_z = grid[i + 1].log_z - integrate(i, i + 1);
        const double h = grid[i + 1].t - grid[i].t;
        var += std::pow(h / 2.0 * se[i + 1], 2) + std::pow(h / 2.0 * se[i], 2);
        grid[i].std_error = std::sqrt(var);
      }
      // Same rule on the doubled step through every other node; the rule is
      // fourth order, so the difference over 15 estimates the fine-grid error.
      double worst = -1.0;
      double coarse = grid[z].log_z;
      for (std::size_t i = z + 2; i < m; i += 2) {
        coarse += integrate(i - 2, i);
        worst = std::max(worst, std::abs(grid[i].log_z - coarse) / 15.0);
      }
      coarse = grid[z].log_z;
      for (std::size_t i = z; i >= 2; i -= 2) {
        coarse -= integrate(i - 2, i);
        worst = std::max(worst, std::abs(grid[i - 2].log_z - coarse) / 15.0);
      }
      if (worst >= 0.0) richardson = worst;
      break;
    }
  }
  if (zero_index) {
    grid[*zero_index].log_z = log_n_fact;
    grid[*zero_index].std_error = 0.0;
  }
  NormalizerTable table(statistic.name, statistic.n, method, seed, std::move(direction),
                        std::move(grid));
  table.set_richardson_error(richardson);
  return table;
}

std::string to_json(const NormalizerTable& table) {
  nlohmann::ordered_json j;
  j["version"] = kNormalizerTableVersion;
  j["kind"] = "normalizer_table";
  j["statistic"] = table.statistic();
  j["n"] = table.n();
  j["method"] = to_string(table.method());
  j["seed"] = table.seed();
  j["direction"] = table.direction();
  auto grid = nlohmann::ordered_json::array();
  for (const auto& p : table.grid()) {
    grid.push_back({{"theta", p.t}, {"log_z", p.log_z}, {"stderr", p.std_error}});
  }
  j["grid"] = std::move(grid);
  if (table.richardson_error()) j["richardson_error"] = *table.richardson_error();
  return j.dump(2) + "\n";
}

NormalizerTable table_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("normalizer table is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("version").get<int>() != kNormalizerTableVersion) {
      throw ValidationError("unsupported normalizer table version");
    }
    std::vector<NormalizerTable::Point> grid;
    for (const auto& p : j.at("grid")) {
      grid.push_back({p.at("theta").get<double>(), p.at("log_z").get<double>(),
                      p.at("stderr").get<double>()});
    }
    Vector direction{1.0};
    if (j.contains("direction")) direction = j.at("direction").get<Vector>();
    NormalizerTable table(j.at("statistic").get<std::string>(), j.at("n").get<int>(),
                          parse_normalizer_source(j.at("method").get<std::string>()),
                          j.at("seed").get<std::uint64_t>(), std::move(direction), std::move(grid));
    if (j.contains("richardson_error")) {
      table.set_richardson_error(j.at("richardson_error").get<double>());
    }
    return table;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed normalizer table: ") + e.what());
  }
}

}  // namespace mixcheck
