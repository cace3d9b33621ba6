#include "doctest.h"

#include <cmath>

#include "mixcheck/error.hpp"
#include "mixcheck/normalizer.hpp"
#include "oracles.hpp"

using namespace mixcheck;

namespace {

std::vector<double> th(double t) { return {t}; }

}  // namespace

TEST_CASE("importance_log_Z") {
  const auto f6 = make_statistic("fixed-points", 6);
  const auto zero = importance_log_Z(f6, th(0.0), 1000, 1);
  CHECK(zero.log_z == std::lgamma(7.0));
  CHECK(zero.std_error == 0.0);

  const auto e6 = importance_log_Z(f6, th(1.0), 100000, 2);
  CHECK(std::abs(e6.log_z - std::log(oracle::brute_Z(6, 1.0))) < 3 * e6.std_error);

  const auto f52 = make_statistic("fixed-points", 52);
  const auto e52 = importance_log_Z(f52, th(0.5), 100000, 3);
  CHECK(e52.std_error > 0.0);
  CHECK(std::abs(e52.log_z - exact_log_Z(52, 0.5)) < 3 * e52.std_error);

  CHECK_THROWS_AS(importance_log_Z(f6, th(1.0), 999, 1), ValidationError);
  CHECK_THROWS_AS(importance_log_Z(f52, th(12.0), 1000, 1), RuntimeFailure);
  CHECK_THROWS_AS(importance_log_Z(f6, std::vector<double>{1.0, 2.0}, 1000, 1), ValidationError);

  // Same seed, same estimate.
  CHECK(importance_log_Z(f6, th(1.0), 5000, 9).log_z == importance_log_Z(f6, th(1.0), 5000, 9).log_z);
}

TEST_CASE("thermodynamic_log_Z") {
  const auto f6 = make_statistic("fixed-points", 6);
  ThermodynamicOptions opt;
  opt.chain.seed = 17;
  const auto zero = thermodynamic_log_Z(f6, th(0.0), opt);
  CHECK(zero.log_z == std::lgamma(7.0));

  const auto r = thermodynamic_log_Z(f6, th(1.5), opt);
  const double exact_excess = exact_log_Z(6, 1.5) - std::lgamma(7.0);
  CHECK(std::abs((r.log_z - std::lgamma(7.0)) - exact_excess) < 0.02 * exact_excess);
  REQUIRE(r.integrand.size() == 21);
  CHECK(r.integrand[0] / 1.5 == doctest::Approx(1.0));
  CHECK(r.richardson_error.has_value());

  opt.grid_points = 5;
  const auto small = thermodynamic_log_Z(f6, th(1.0), opt);
  CHECK(small.richardson_error.has_value());
  CHECK(std::isfinite(small.log_z));

  opt.grid_points = 4;
  CHECK_THROWS_AS(thermodynamic_log_Z(f6, th(1.0), opt), ValidationError);
  opt.grid_points = 3;
  CHECK_THROWS_AS(thermodynamic_log_Z(f6, th(1.0), opt), ValidationError);

  opt.grid_points = 9;
  opt.threads = 1;
  const auto a = thermodynamic_log_Z(f6, th(0.8), opt);
  opt.threads = 4;
  const auto b = thermodynamic_log_Z(f6, th(0.8), opt);
  CHECK(a.log_z == b.log_z);
}

TEST_CASE("exact tables") {
  const auto f6 = make_statistic("fixed-points", 6);
  const auto table = build_table(f6, -3.0, 3.0, 61, NormalizerSource::exact, 0);
  for (const auto& p : table.grid()) CHECK(p.log_z == doctest::Approx(exact_log_Z(6, p.t)).epsilon(1e-15));
  // Midpoints between grid nodes against the exact value.
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < table.grid().size(); ++i) {
    const double t = 0.5 * (table.grid()[i].t + table.grid()[i + 1].t);
    worst = std::max(worst, std::abs(table.at(t) - exact_log_Z(6, t)));
  }
  CHECK(worst < 1e-3);
  CHECK_THROWS_AS(table.at(3.5), ValidationError);
  CHECK_THROWS_AS(table.at(-3.01), ValidationError);
  CHECK(table.convexity_violations().empty());
  CHECK(table.derivative(0.7) == doctest::Approx(ExactFixedPointPartition(6).mean(0.7)).epsilon(1e-3));

  CHECK_THROWS_AS(build_table(make_statistic("adjacent-pairs", 6), -1, 1, 5, NormalizerSource::exact, 0),
                  UnsupportedError);
  CHECK_THROWS_AS(build_table(f6, 1.0, -1.0, 5, NormalizerSource::exact, 0), ValidationError);
}

TEST_CASE("importance tables agree with the exact route") {
  // The uniform proposal's weight variance explodes for large positive
  // theta once n grows, so n = 13 stays on the well-conditioned side.
  for (auto [n, hi] : {std::pair{6, 2.0}, {13, 1.0}}) {
    const auto s = make_statistic("fixed-points", n);
    TableOptions opt;
    opt.importance_samples = 100000;
    const auto table = build_table(s, -2.0, hi, 13, NormalizerSource::importance, 5, opt);
    for (const auto& p : table.grid()) {
      CAPTURE(n);
      CAPTURE(p.t);
      if (p.t == 0.0) {
        CHECK(p.log_z == std::lgamma(n + 1.0));
      } else {
        CHECK(std::abs(p.log_z - exact_log_Z(n, p.t)) <= 3 * p.std_error);
      }
    }
    CHECK(table.convexity_violations().empty());
    opt.threads = 3;
    const auto again = build_table(s, -2.0, hi, 13, NormalizerSource::importance, 5, opt);
    for (std::size_t i = 0; i < table.grid().size(); ++i) CHECK(again.grid()[i].log_z == table.grid()[i].log_z);
  }
}

TEST_CASE("thermodynamic tables agree with the exact route") {
  const auto s = make_statistic("fixed-points", 6);
  TableOptions opt;
  const auto table = build_table(s, -2.0, 2.0, 21, NormalizerSource::thermodynamic, 8, opt);
  for (const auto& p : table.grid()) {
    CAPTURE(p.t);
    CHECK(std::abs(p.log_z - exact_log_Z(6, p.t)) <= 3 * p.std_error + 1e-12);
  }
  CHECK(table.grid()[10].log_z == std::lgamma(7.0));
  CHECK(table.convexity_violations().empty());
  CHECK_THROWS_AS(build_table(s, 0.5, 2.0, 4, NormalizerSource::thermodynamic, 8, opt), ValidationError);
}

TEST_CASE("table derivative matches sampled mean statistic") {
  const auto s = make_statistic("adjacent-pairs", 6);
  TableOptions opt;
  opt.importance_samples = 200000;
  const auto table = build_table(s, -1.0, 1.0, 41, NormalizerSource::importance, 21, opt);
  for (double t : {-0.6, 0.25, 0.7}) {
    ChainConfig cfg{200000, 2000, 0.0, 77, 1, false};
    const auto est = estimate_mean_parameter(s, th(t), cfg);
    // Slope noise from the two bracketing nodes, plus sampler noise.
    const auto& g = table.grid();
    const auto i = static_cast<std::size_t>((t - g.front().t) / (g[1].t - g[0].t));
    const double node_se = std::hypot(g[i].std_error, g[i + 1].std_error) / (g[i + 1].t - g[i].t);
    CAPTURE(t);
    CHECK(std::abs(table.derivative(t) - est.mean[0]) <= 3 * std::hypot(est.std_error[0], node_se));
  }
}

TEST_CASE("multi-dimensional ray tables") {
  const auto s = make_statistic("wash-triple", 5);
  TableOptions opt;
  opt.importance_samples = 20000;
  opt.direction = {1.0, 0.1, -0.1};
  const auto table = build_table(s, -1.0, 1.0, 11, NormalizerSource::importance, 4, opt);
  CHECK(table.dimension() == 3);
  CHECK(table.log_z(std::vector<double>{0.0, 0.0, 0.0}) == std::lgamma(6.0));
  // Brute force along the ray.
  for (double t : {-0.8, 0.4, 1.0}) {
    double z = 0.0;
    oracle::for_each_perm(5, [&](const oracle::Perm& p) {
      z += std::exp(t * (oracle::adjacent_pairs(p) + 0.1 * oracle::position_of(p, 1) -
                         0.1 * oracle::position_of(p, 5)));
    });
    const std::vector<double> theta{t, 0.1 * t, -0.1 * t};
    CHECK(std::abs(table.log_z(theta) - std::log(z)) < 0.02);
  }
  CHECK_THROWS_AS(table.log_z(std::vector<double>{0.5, 0.0, 0.0}), ValidationError);
}

TEST_CASE("table JSON round trip") {
  const auto s = make_statistic("fixed-points", 6);
  const auto table = build_table(s, -1.0, 1.0, 5, NormalizerSource::exact, 12);
  const auto text = to_json(table);
  const auto back = table_from_json(text);
  CHECK(back.statistic() == "fixed-points");
  CHECK(back.n() == 6);
  CHECK(back.seed() == 12);
  CHECK(back.method() == NormalizerSource::exact);
  REQUIRE(back.grid().size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(back.grid()[i].log_z == table.grid()[i].log_z);
  CHECK(to_json(back) == text);
  CHECK_THROWS_AS(table_from_json("{}"), ValidationError);
  CHECK_THROWS_AS(table_from_json("not json"), ValidationError);
}
