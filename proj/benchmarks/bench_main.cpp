#include <benchmark/benchmark.h>

#include <vector>

#include "mixcheck/combinatorics.hpp"
#include "mixcheck/expfam.hpp"
#include "mixcheck/inference.hpp"
#include "mixcheck/normalizer.hpp"
#include "mixcheck/samplers.hpp"
#include "mixcheck/shuffle.hpp"
#include "mixcheck/statistics.hpp"

using namespace mixcheck;

namespace {

void BM_ExactLogZ(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  double t = 0.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(exact_log_Z(n, t));
    t = -t;
  }
}
BENCHMARK(BM_ExactLogZ)->Arg(6)->Arg(52)->Arg(500);

void BM_FixedPointCounts(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fixed_point_counts(n));
}
BENCHMARK(BM_FixedPointCounts)->Arg(52)->Arg(200);

void BM_ExactWalkDistribution(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(exact_walk_distribution(n, 20));
}
BENCHMARK(BM_ExactWalkDistribution)->DenseRange(5, 7);

void BM_SampleDataset(benchmark::State& state) {
  const long k = state.range(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_dataset({ShuffleKind::random_transpositions, k, 52, 7}, 200));
  }
  state.SetItemsProcessed(state.iterations() * 200 * k);
}
BENCHMARK(BM_SampleDataset)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_AuxiliarySum(benchmark::State& state) {
  const ExactFixedPointAuxiliary aux(52);
  auto rng = make_engine(11);
  const std::vector<double> theta{0.2};
  for (auto _ : state) benchmark::DoNotOptimize(aux.sample_sum(theta, state.range(0), rng));
}
BENCHMARK(BM_AuxiliarySum)->Arg(200)->Arg(2000);

void BM_ExchangeChain(benchmark::State& state) {
  const auto fp = make_statistic("fixed-points", 52);
  const auto data =
      summarize(fp, sample_dataset({ShuffleKind::random_transpositions, 180, 52, 7}, 200));
  const ExactFixedPointAuxiliary aux(52);
  const auto prior = PriorSpec::normal(0.0, 0.1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_exchange_chain(data, aux, prior, {1000, 200, 0.2, 3, 1, true}));
  }
}
BENCHMARK(BM_ExchangeChain)->Unit(benchmark::kMillisecond);

void BM_ImportanceLogZ(benchmark::State& state) {
  const auto fp = make_statistic("fixed-points", 13);
  const std::vector<double> theta{0.5};
  for (auto _ : state) benchmark::DoNotOptimize(importance_log_Z(fp, theta, state.range(0), 5));
}
BENCHMARK(BM_ImportanceLogZ)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
