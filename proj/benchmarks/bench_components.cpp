#include <benchmark/benchmark.h>

#include "common.hpp"
#include "tumorseg/components.hpp"
#include "tumorseg/postprocess.hpp"

using namespace tumorseg;

static void BM_ConnectedComponents(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto conn = connectivity_from_int(static_cast<int>(state.range(1)));
  const auto mask = bench::random_mask(n, 0.3, 1);
  for (auto _ : state) benchmark::DoNotOptimize(connected_components(mask, conn));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * mask.size()));
}
BENCHMARK(BM_ConnectedComponents)->ArgsProduct({{32, 64, 128}, {6, 26}})->Unit(benchmark::kMillisecond);

static void BM_Postprocess(benchmark::State& state) {
  const auto lab = bench::tumor(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(postprocess::postprocess_prediction(lab));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * lab.size()));
}
BENCHMARK(BM_Postprocess)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
