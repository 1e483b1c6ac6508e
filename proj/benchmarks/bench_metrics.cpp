#include <benchmark/benchmark.h>

#include "common.hpp"
#include "tumorseg/distance.hpp"
#include "tumorseg/labels.hpp"
#include "tumorseg/metrics.hpp"

using namespace tumorseg;

static void BM_DistanceTransform(benchmark::State& state) {
  const auto mask = bench::random_mask(static_cast<std::size_t>(state.range(0)), 0.01, 3);
  for (auto _ : state) benchmark::DoNotOptimize(squared_distance_transform(mask, {1.0, 1.0, 1.0}));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * mask.size()));
}
BENCHMARK(BM_DistanceTransform)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_Hd95(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = labels::to_regions(bench::tumor(n, 4)).wt;
  const auto b = labels::to_regions(bench::tumor(n, 5)).tc;
  for (auto _ : state) benchmark::DoNotOptimize(hd95(a, b, {1.0, 1.0, 1.0}));
}
BENCHMARK(BM_Hd95)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_EvaluateCase(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto pred = bench::tumor(n, 6), gt = bench::tumor(n, 7);
  for (auto _ : state) benchmark::DoNotOptimize(metrics::evaluate_case(pred, gt));
}
BENCHMARK(BM_EvaluateCase)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
