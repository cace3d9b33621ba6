#include "doctest.h"

#include <cmath>
#include <random>

#include "mixcheck/error.hpp"
#include "mixcheck/expfam.hpp"
#include "oracles.hpp"

using namespace mixcheck;

namespace {

ExpFamilyModel fixed_point_model(int n, double theta) {
  const auto s = make_statistic("fixed-points", n);
  return ExpFamilyModel(s, {theta}, exact_partition_for(s));
}

double m_exact(int n, double t) { return exact_log_Z(n, t); }

}  // namespace

TEST_CASE("log_density") {
  const auto m0 = fixed_point_model(5, 0.0);
  for_each_permutation(5, [&](const Permutation& s) {
    CHECK(m0.log_density(s) == doctest::Approx(-std::lgamma(6.0)).epsilon(1e-15));
  });
  const auto m = fixed_point_model(4, std::log(2.0));
  CHECK(m.log_density(Permutation::identity(4)) ==
        doctest::Approx(4 * std::log(2.0) - std::log(65.0)).epsilon(1e-14));

  for (int n = 1; n <= 6; ++n) {
    for (double theta : {-1.3, 0.4, 2.0}) {
      const auto model = fixed_point_model(n, theta);
      double total = 0.0;
      for_each_permutation(n, [&](const Permutation& s) { total += std::exp(model.log_density(s)); });
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  const ExpFamilyModel no_norm(make_statistic("adjacent-pairs", 6), {0.3});
  CHECK_THROWS_AS(no_norm.log_partition(), RuntimeFailure);
  const ExpFamilyModel at_zero(make_statistic("adjacent-pairs", 6), {0.0});
  CHECK(at_zero.log_partition() == doctest::Approx(std::lgamma(7.0)));
  CHECK_THROWS_AS(ExpFamilyModel(make_statistic("wash-triple", 6), {0.0}), ValidationError);
}

TEST_CASE("uniform case is exactly uniform") {
  for (int n = 1; n <= 6; ++n) {
    const auto model = fixed_point_model(n, 0.0);
    double worst = 0.0;
    for_each_permutation(n, [&](const Permutation& s) {
      worst = std::max(worst, std::abs(std::exp(model.log_density(s)) - 1.0 / oracle::factorial(n)));
    });
    CHECK(worst <= 1e-15);
  }
}

TEST_CASE("mean_parameter") {
  CHECK(mean_parameter(fixed_point_model(52, 0.0))[0] == doctest::Approx(1.0).epsilon(1e-12));
  const ExpFamilyModel adj(make_statistic("adjacent-pairs", 52), {0.0});
  CHECK(mean_parameter(adj)[0] == doctest::Approx(51.0 / 52.0).epsilon(1e-14));

  const double h = 1e-4;
  const double fd = (m_exact(6, 0.7 + h) - m_exact(6, 0.7 - h)) / (2 * h);
  CHECK(std::abs(mean_parameter(fixed_point_model(6, 0.7))[0] - fd) < 1e-6);

  for (int n : {4, 6, 13}) {
    for (double theta : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
      const double g = (m_exact(n, theta + h) - m_exact(n, theta - h)) / (2 * h);
      const double exact = mean_parameter(fixed_point_model(n, theta))[0];
      CAPTURE(n);
      CAPTURE(theta);
      CHECK(std::abs(exact - g) / std::abs(exact) < 1e-5);
    }
  }
  const ExpFamilyModel adj_nonzero(make_statistic("adjacent-pairs", 6), {0.5});
  CHECK_THROWS_AS(mean_parameter(adj_nonzero), RuntimeFailure);
}

TEST_CASE("covariance_parameter") {
  CHECK(covariance_parameter(fixed_point_model(52, 0.0))(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
  const double h = 1e-3;
  const double second = (m_exact(6, 0.5 + h) - 2 * m_exact(6, 0.5) + m_exact(6, 0.5 - h)) / (h * h);
  CHECK(std::abs(covariance_parameter(fixed_point_model(6, 0.5))(0, 0) - second) < 1e-4);
  for (double theta = -5.0; theta <= 5.0; theta += 0.25) {
    CHECK(covariance_parameter(fixed_point_model(13, theta))(0, 0) >= 0.0);
  }
}

TEST_CASE("conjugate posterior update") {
  const auto prior = PriorSpec::conjugate(1.0, {1.0});
  const std::vector<double> none{0.0};
  const auto same = conjugate_posterior_update(prior, 0, none);
  CHECK(same.n0 == prior.n0);
  CHECK(same.x0 == prior.x0);

  const std::vector<double> tbar{0.8};
  const auto post = conjugate_posterior_update(prior, 199, tbar);
  CHECK(post.n0 == doctest::Approx(200.0));
  CHECK(post.x0[0] == doctest::Approx(0.801).epsilon(1e-14));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int i = 0; i < 200; ++i) {
    const auto p = PriorSpec::conjugate(u(rng), {u(rng), u(rng)});
    const long n1 = 1 + static_cast<long>(u(rng) * 20), n2 = 1 + static_cast<long>(u(rng) * 20);
    const std::vector<double> t1{u(rng), u(rng)}, t2{u(rng), u(rng)};
    const auto two_step = conjugate_posterior_update(conjugate_posterior_update(p, n1, t1), n2, t2);
    const std::vector<double> pooled{(n1 * t1[0] + n2 * t2[0]) / (n1 + n2),
                                     (n1 * t1[1] + n2 * t2[1]) / (n1 + n2)};
    const auto one_step = conjugate_posterior_update(p, n1 + n2, pooled);
    CHECK(std::abs(two_step.n0 - one_step.n0) <= 1e-12 * one_step.n0);
    for (int k = 0; k < 2; ++k) {
      CHECK(std::abs(two_step.x0[static_cast<std::size_t>(k)] - one_step.x0[static_cast<std::size_t>(k)]) <=
            1e-12 * std::abs(one_step.x0[static_cast<std::size_t>(k)]));
    }
  }
  CHECK_THROWS_AS(conjugate_posterior_update(PriorSpec::normal(0.0, 0.1), 3, tbar), UnsupportedError);
}

TEST_CASE("prior densities") {
  const auto normal = PriorSpec::normal(0.0, 0.1);
  const double at0 = prior_log_density(normal, std::vector<double>{0.0});
  for (double t : {-0.5, -0.01, 0.01, 0.3}) CHECK(prior_log_density(normal, std::vector<double>{t}) < at0);

  const int n = 6;
  LogPartitionFn m = [&](std::span<const double> t) { return exact_log_Z(n, t[0]); };
  const auto conj = PriorSpec::conjugate(3.0, {1.0});  // x0 = grad m(0) = E_0[F]
  const double h = 1e-5;
  const double slope = (prior_log_density(conj, std::vector<double>{h}, m) -
                        prior_log_density(conj, std::vector<double>{-h}, m)) / (2 * h);
  CHECK(std::abs(slope) < 1e-6);
  CHECK_THROWS_AS(prior_log_density(conj, std::vector<double>{0.0}), RuntimeFailure);

  const auto gamma = PriorSpec::gamma(2.0, 2.0);
  CHECK(prior_log_density(gamma, std::vector<double>{1.0}) ==
        doctest::Approx(std::log(4.0 * std::exp(-2.0)) - std::lgamma(2.0)).epsilon(1e-14));
  CHECK(prior_log_density(gamma, std::vector<double>{0.0}) == -INFINITY);
  CHECK(prior_log_density(gamma, std::vector<double>{-1.0}) == -INFINITY);
}

TEST_CASE("prior-mean identity by quadrature") {
  const int n = 6;
  const auto levels = oracle::brute_levels(n);
  LogPartitionFn m = [&](std::span<const double> t) { return oracle::log_Z_from_levels(levels, t[0]); };
  for (double n0 : {1.0, 5.0}) {
    for (double x0 : {0.5, 1.0, 2.5}) {
      const auto prior = PriorSpec::conjugate(n0, {x0});
      const double lo = -80.0, hi = 40.0;
      const int points = 240001;
      const double step = (hi - lo) / (points - 1);
      std::vector<double> log_w, log_wg;
      for (int i = 0; i < points; ++i) {
        const double t = lo + i * step;
        const double lp = prior_log_density(prior, std::vector<double>{t}, m);
        const double grad = mean_parameter(fixed_point_model(n, t))[0];
        log_w.push_back(lp);
        log_wg.push_back(lp + std::log(grad));
      }
      const double prior_mean_of_grad =
          std::exp(oracle::log_simpson(log_wg, step) - oracle::log_simpson(log_w, step));
      CAPTURE(n0);
      CAPTURE(x0);
      CHECK(std::abs(prior_mean_of_grad - x0) < 1e-3);
    }
  }
}

TEST_CASE("prior grammar") {
  const auto fp = make_statistic("fixed-points", 52);
  const auto normal = parse_prior("normal:0,0.1");
  CHECK(normal.kind == PriorKind::normal);
  CHECK(normal.mu == std::vector<double>{0.0});
  CHECK(normal.sigma2 == 0.1);
  const auto conj = parse_prior("conjugate:2", &fp);
  CHECK(conj.kind == PriorKind::conjugate);
  CHECK(conj.n0 == 2.0);
  CHECK(conj.x0 == std::vector<double>{1.0});
  CHECK(parse_prior("conjugate:1,1.5", &fp).x0 == std::vector<double>{1.5});
  const auto g = parse_prior("gamma:2,3");
  CHECK(g.alpha == 2.0);
  CHECK(g.beta == 3.0);
  CHECK(parse_prior(to_string(normal)).sigma2 == normal.sigma2);

  CHECK_THROWS_AS(parse_prior("normal:0,-1"), ValidationError);
  CHECK_THROWS_AS(parse_prior("normal:0"), ValidationError);
  CHECK_THROWS_AS(parse_prior("conjugate:0,1", &fp), ValidationError);
  CHECK_THROWS_AS(parse_prior("conjugate:1,0", &fp), ValidationError);   // hull boundary
  CHECK_THROWS_AS(parse_prior("conjugate:1,52", &fp), ValidationError);  // hull boundary
  CHECK_THROWS_AS(parse_prior("gamma:0,1"), ValidationError);
  CHECK_THROWS_AS(parse_prior("normal:a,1"), ValidationError);
  CHECK_THROWS_AS(parse_prior("jeffreys"), UnsupportedError);
  CHECK_THROWS_AS(parse_prior("flat:1"), UnsupportedError);
  CHECK_THROWS_AS(parse_prior("cauchy:0,1"), ValidationError);
}

TEST_CASE("n0 strategies") {
  CHECK(resolve_n0_values(N0Strategy::fixed_one, std::nullopt, {}) == std::vector<double>{1.0});
  CHECK(resolve_n0_values(N0Strategy::user_supplied, 4.0, {}) == std::vector<double>{4.0});
  CHECK_THROWS_AS(resolve_n0_values(N0Strategy::user_supplied, std::nullopt, {}), ValidationError);
  CHECK(resolve_n0_values(N0Strategy::sweep, std::nullopt, {0.5, 1, 2}) == std::vector<double>{0.5, 1, 2});
  CHECK_THROWS_AS(resolve_n0_values(N0Strategy::empirical_bayes, std::nullopt, {}), UnsupportedError);
  CHECK_THROWS_AS(resolve_n0_values(N0Strategy::vanishing, std::nullopt, {}), UnsupportedError);
  for (auto s : {N0Strategy::fixed_one, N0Strategy::user_supplied, N0Strategy::sweep,
                 N0Strategy::empirical_bayes, N0Strategy::vanishing}) {
    CHECK(parse_n0_strategy(to_string(s)) == s);
  }
  CHECK(n0_for_prior_weight(200, 0.5) == doctest::Approx(200.0));
  CHECK_THROWS_AS(n0_for_prior_weight(200, 1.0), ValidationError);
}
