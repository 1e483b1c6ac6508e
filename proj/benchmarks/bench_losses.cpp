#include <benchmark/benchmark.h>

#include <random>

#include "common.hpp"
#include "tumorseg/labels.hpp"
#include "tumorseg/losses.hpp"

using namespace tumorseg;

namespace {

ScalarVolume random_probs(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  std::vector<double> v(n * n * n);
  for (auto& x : v) x = u(rng);
  return ScalarVolume(GridShape{n, n, n}, std::move(v));
}

}  // namespace

static void BM_SingleLoss(benchmark::State& state) {
  const auto kind = static_cast<losses::LossKind>(state.range(0));
  const auto n = static_cast<std::size_t>(state.range(1));
  const auto p = random_probs(n, 8);
  const auto t = labels::to_regions(bench::tumor(n, 9)).wt;
  state.SetLabel(std::string(losses::name(kind)));
  for (auto _ : state) benchmark::DoNotOptimize(losses::loss(kind, p, t));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * p.size()));
}
BENCHMARK(BM_SingleLoss)
    ->ArgsProduct({{static_cast<int>(losses::LossKind::kMse), static_cast<int>(losses::LossKind::kCe),
                    static_cast<int>(losses::LossKind::kDice), static_cast<int>(losses::LossKind::kFocal),
                    static_cast<int>(losses::LossKind::kEdge)},
                   {64}})
    ->Unit(benchmark::kMillisecond);

static void BM_CompoundCombo2(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const RegionProbs probs{random_probs(n, 10), random_probs(n, 11), random_probs(n, 12)};
  const auto gt = labels::to_regions(bench::tumor(n, 13));
  const auto spec = losses::CompoundLossSpec::combo2();
  for (auto _ : state) benchmark::DoNotOptimize(losses::compound_loss(spec, probs, gt));
}
BENCHMARK(BM_CompoundCombo2)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
