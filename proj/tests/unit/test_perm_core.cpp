#include "doctest.h"

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "mixcheck/error.hpp"
#include "mixcheck/perm_io.hpp"
#include "mixcheck/permutation.hpp"
#include "mixcheck/shuffle.hpp"
#include "mixcheck/statistics.hpp"
#include "oracles.hpp"

using namespace mixcheck;

namespace {

std::map<int, long> library_histogram(int n, int (*stat)(const Permutation&)) {
  std::map<int, long> h;
  for_each_permutation(n, [&](const Permutation& p) { ++h[stat(p)]; });
  return h;
}

int top_card(const Permutation& p) { return position_of_card(p, 1); }
int bottom_card(const Permutation& p) { return position_of_card(p, p.size()); }

/// Upper tail of chi-square, straight from Boost's distribution object.
double chi2_tail(double x, double df) {
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), x));
}

}  // namespace

TEST_CASE("permutation construction and group operations") {
  const Permutation p({3, 1, 2});
  CHECK(p.size() == 3);
  CHECK(p(1) == 3);
  CHECK(p.compose(p.inverse()).is_identity());
  CHECK(p.inverse().compose(p).is_identity());
  CHECK_THROWS_AS(Permutation({1, 1, 2}), ValidationError);
  CHECK_THROWS_AS(Permutation({0, 1, 2}), ValidationError);
  CHECK_THROWS_AS(Permutation(std::vector<int>{}), ValidationError);
  CHECK_THROWS_AS(p.at(4), ValidationError);
  CHECK(p.to_string() == "3 1 2");

  for (int n = 1; n <= 6; ++n) {
    std::uint64_t expected = 0;
    for_each_permutation(n, [&](const Permutation& s) {
      CHECK(lehmer_rank(s) == expected);
      CHECK(lehmer_unrank(n, expected) == s);
      ++expected;
    });
  }
}

TEST_CASE("fixed_points examples") {
  CHECK(fixed_points(Permutation::identity(52)) == 52);
  CHECK(fixed_points(Permutation({2, 1, 3, 4})) == 2);
  const auto h = library_histogram(4, fixed_points);
  CHECK(h == std::map<int, long>{{0, 9}, {1, 8}, {2, 6}, {4, 1}});
}

TEST_CASE("adjacent_pairs examples") {
  CHECK(adjacent_pairs(Permutation::identity(52)) == 51);
  std::vector<int> rev(52);
  for (int i = 0; i < 52; ++i) rev[static_cast<std::size_t>(i)] = 52 - i;
  CHECK(adjacent_pairs(Permutation(rev)) == 0);
  const auto h = library_histogram(4, adjacent_pairs);
  CHECK(h == std::map<int, long>{{0, 11}, {1, 9}, {2, 3}, {3, 1}});
  CHECK_THROWS_AS(adjacent_pairs(Permutation::identity(1)), ValidationError);
}

TEST_CASE("position_of_card examples") {
  CHECK(position_of_card(Permutation::identity(5), 1) == 1);
  CHECK(position_of_card(Permutation({3, 1, 2}), 1) == 2);
  CHECK_THROWS_AS(position_of_card(Permutation({3, 1, 2}), 4), ValidationError);
  CHECK_THROWS_AS(position_of_card(Permutation({3, 1, 2}), 0), ValidationError);
  const auto h = library_histogram(5, top_card);
  REQUIRE(h.size() == 5);
  for (const auto& [pos, count] : h) CHECK(count == 24);
}

TEST_CASE("statistic histograms match brute force for n <= 8") {
  for (int n = 2; n <= 8; ++n) {
    CAPTURE(n);
    CHECK(library_histogram(n, fixed_points) == oracle::histogram(n, oracle::fixed_points));
    CHECK(library_histogram(n, adjacent_pairs) == oracle::histogram(n, oracle::adjacent_pairs));
    CHECK(library_histogram(n, top_card) ==
          oracle::histogram(n, [](const oracle::Perm& p) { return oracle::position_of(p, 1); }));
    CHECK(library_histogram(n, bottom_card) ==
          oracle::histogram(n, [n](const oracle::Perm& p) { return oracle::position_of(p, n); }));
  }
}

TEST_CASE("fixed_points never equals n - 1") {
  for (int n = 2; n <= 8; ++n) {
    for_each_permutation(n, [&](const Permutation& p) { CHECK_FALSE(fixed_points(p) == n - 1); });
  }
}

TEST_CASE("statistic specs evaluate consistently") {
  for (const auto& name : statistic_names()) {
    const auto s = make_statistic(name, 6);
    CAPTURE(name);
    CHECK(static_cast<int>(s.null_mean.size()) == s.dimension);
    // Null mean matches the exhaustive average over S_6.
    std::vector<double> acc(static_cast<std::size_t>(s.dimension), 0.0);
    for_each_permutation(6, [&](const Permutation& p) {
      const auto v = s(p);
      for (int i = 0; i < s.dimension; ++i) acc[static_cast<std::size_t>(i)] += v[static_cast<std::size_t>(i)];
    });
    for (int i = 0; i < s.dimension; ++i) {
      CHECK(acc[static_cast<std::size_t>(i)] / 720.0 ==
            doctest::Approx(s.null_mean[static_cast<std::size_t>(i)]).epsilon(1e-12));
    }
    CHECK(s.in_open_hull(s.null_mean));
  }
  CHECK_THROWS_AS(make_statistic("nope", 6), ValidationError);
  CHECK(make_statistic("fixed-points", 52).exact_counts);
}

TEST_CASE("apply_shuffle with zero steps is the identity") {
  auto rng = make_engine(1);
  CHECK(apply_shuffle({ShuffleKind::random_transpositions, 0, 52, 1}, rng).is_identity());
}

TEST_CASE("one transposition step on n=3 has law Q") {
  // Each (L, R) pair has probability 1/9: the diagonal gives Id with 3/9,
  // each transposition arises from two ordered pairs, 2/9.
  auto rng = make_engine(42);
  const ShuffleScheme scheme{ShuffleKind::random_transpositions, 1, 3, 0};
  std::map<std::uint64_t, long> counts;
  const long draws = 900000;
  for (long i = 0; i < draws; ++i) ++counts[lehmer_rank(apply_shuffle(scheme, rng))];
  CHECK(counts.size() == 4);  // Id and three transpositions only
  for (const auto& [rank, c] : counts) {
    const auto sigma = lehmer_unrank(3, rank);
    const double p = sigma.is_identity() ? 1.0 / 3.0 : 2.0 / 9.0;
    const double sd = std::sqrt(draws * p * (1 - p));
    CHECK(std::abs(c - draws * p) < 4 * sd);
  }
}

TEST_CASE("uniform shuffles are uniform on small decks") {
  auto rng = make_engine(7);
  for (int n = 2; n <= 5; ++n) {
    CAPTURE(n);
    const long draws = 1000000;
    const auto cells = static_cast<std::size_t>(oracle::factorial(n));
    std::vector<long> counts(cells, 0);
    for (long i = 0; i < draws; ++i) {
      ++counts[lehmer_rank(apply_shuffle({ShuffleKind::uniform, 0, n, 0}, rng))];
    }
    const double p = 1.0 / static_cast<double>(cells);
    double x2 = 0.0;
    for (long c : counts) {
      const double e = draws * p;
      x2 += (c - e) * (c - e) / e;
      if (n == 4) CHECK(std::abs(c - e) < 4 * std::sqrt(draws * p * (1 - p)));
    }
    CHECK(chi2_tail(x2, static_cast<double>(cells - 1)) > 1e-6);
  }
}

TEST_CASE("sample_dataset") {
  const auto one = sample_dataset({ShuffleKind::random_transpositions, 0, 52, 3}, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0].is_identity());

  const ShuffleScheme scheme{ShuffleKind::random_transpositions, 180, 52, 11};
  const auto data = sample_dataset(scheme, 200);
  long derangements = 0;
  for (const auto& p : data) derangements += fixed_points(p) == 0;
  CHECK(std::abs(derangements / 200.0 - std::exp(-1.0)) <= 0.10);

  CHECK(sample_dataset(scheme, 200) == data);
  CHECK(sample_dataset(scheme, 200, 4) == data);
  CHECK(sample_dataset(scheme, 200, 3) == data);
  CHECK_THROWS_AS(sample_dataset(scheme, 0), ValidationError);
  CHECK_THROWS_AS(ShuffleScheme({ShuffleKind::random_transpositions, -1, 52, 0}).validate(),
                  ValidationError);
}

TEST_CASE(".perm files round trip") {
  const ShuffleScheme scheme{ShuffleKind::random_transpositions, 5, 6, 9};
  const auto data = sample_dataset(scheme, 10);
  std::stringstream ss;
  write_perm_file(ss, scheme, data);
  const auto back = read_perm_file(ss);
  CHECK(back.permutations == data);
  CHECK(back.n() == 6);
  CHECK(back.header_long("k") == 5);
  CHECK(back.header_long("N") == 10);
  CHECK(back.header_long("seed") == 9);

  std::stringstream bad("# comment\n1 2 3\n1 2\n");
  CHECK_THROWS_AS(read_perm_file(bad), ValidationError);
  std::stringstream dup("1 1 2\n");
  CHECK_THROWS_AS(read_perm_file(dup), ValidationError);
  std::stringstream empty("# nothing\n");
  CHECK_THROWS_AS(read_perm_file(empty), ValidationError);
}

TEST_CASE("histogram CSV") {
  std::stringstream ss("value,count\n0,14\n1,19\n2,12\n3,4\n4,1\n5,2\n");
  const auto h = read_histogram_csv(ss);
  CHECK(h.total() == 52);
  CHECK(h.sum_of_values() == 19 + 24 + 12 + 4 + 10);
  CHECK(h.dense_counts() == std::vector<long>{14, 19, 12, 4, 1, 2});
  CHECK(h.expand().size() == 52);
  std::stringstream out;
  write_histogram_csv(out, h);
  CHECK(read_histogram_csv(out).rows == h.rows);
  std::stringstream neg("value,count\n0,-1\n");
  CHECK_THROWS_AS(read_histogram_csv(neg), ValidationError);
  CHECK(histogram_of({2, 0, 2}).rows == std::vector<std::pair<long, long>>{{0, 1}, {2, 2}});
}
