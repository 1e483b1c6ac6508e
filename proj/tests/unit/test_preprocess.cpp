#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "random.hpp"
#include "tumorseg/errors.hpp"
#include "tumorseg/preprocess.hpp"
#include "tumorseg/stats.hpp"

using namespace tumorseg;
using namespace tumorseg::preprocess;
using tumorseg::testing::Rng;

namespace {

// Brain-like volume: zero border shell, random positive interior.
ScalarVolume random_brain(const GridShape& s, Rng& rng, double lo = 10.0, double hi = 500.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(s.voxels(), 0.0);
  for (std::size_t z = 1; z + 1 < s.dz; ++z)
    for (std::size_t y = 1; y + 1 < s.dy; ++y)
      for (std::size_t x = 1; x + 1 < s.dx; ++x) v[s.index(x, y, z)] = d(rng);
  return ScalarVolume(s, std::move(v));
}

BinaryMask full_mask(const GridShape& s) {
  return BinaryMask(s, std::vector<std::uint8_t>(s.voxels(), 1));
}

}  // namespace

TEST_CASE("brain_mask selects nonzero voxels") {
  const GridShape s{4, 4, 4};
  CHECK(brain_mask(ScalarVolume(s, std::vector<double>(64, 0.0))).count() == 0);
  std::vector<double> one(64, 0.0);
  one[17] = 5.0;
  const auto m = brain_mask(ScalarVolume(s, one));
  CHECK(m.count() == 1);
  CHECK(m[17] == 1);

  Rng rng(1);
  std::bernoulli_distribution nz(0.3);
  std::vector<double> v(1000, 0.0);
  std::size_t expected = 0;
  for (auto& x : v) {
    if (nz(rng)) {
      x = 1.0 + static_cast<double>(rng() % 100);
      ++expected;
    }
  }
  CHECK(brain_mask(ScalarVolume(GridShape{10, 10, 10}, v)).count() == expected);
}

TEST_CASE("zscore on {1,2,3} uses the population standard deviation") {
  const GridShape s{4, 1, 1};
  const ScalarVolume vol(s, {0, 1, 2, 3});
  const auto out = zscore_normalize(vol, brain_mask(vol));
  CHECK(out[0] == 0.0);
  CHECK(out[1] == doctest::Approx(-1.224744871391589).epsilon(1e-12));
  CHECK(out[2] == doctest::Approx(0.0));
  CHECK(out[3] == doctest::Approx(1.224744871391589).epsilon(1e-12));
}

TEST_CASE("zscore contracts and errors") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const auto vol = random_brain({9, 8, 7}, rng);
    const auto mask = brain_mask(vol);
    const auto out = zscore_normalize(vol, mask);
    const auto m = masked_moments(out, mask);
    CHECK(std::abs(m.mean) <= 1e-5);
    CHECK(std::abs(m.stddev - 1.0) <= 1e-5);
    for (std::size_t i = 0; i < vol.size(); ++i) {
      if (!mask[i]) CHECK(out[i] == 0.0);
    }
    if (trial < 5) {
      const auto again = zscore_normalize(out, mask);
      for (std::size_t i = 0; i < out.size(); ++i) CHECK(again[i] == doctest::Approx(out[i]).epsilon(1e-6));
    }
  }
  const GridShape s{3, 1, 1};
  CHECK_THROWS_AS(zscore_normalize(ScalarVolume(s, {4, 4, 4}), full_mask(s)), DegenerateInput);
  CHECK_THROWS_AS(zscore_normalize(ScalarVolume(s, {0, 4, 0}), BinaryMask(s, {0, 1, 0})),
                  DegenerateInput);
}

TEST_CASE("rescale maps the 2-98 percentile range of 0..99 onto [0,1]") {
  const GridShape s{100, 1, 1};
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 0.0);
  const ScalarVolume vol(s, v);
  const auto out = rescale_percentile(vol, full_mask(s));
  // P2 = 1.98 and P98 = 97.02 by linear interpolation.
  CHECK(out[0] == 0.0);
  CHECK(out[1] == 0.0);
  CHECK(out[50] == doctest::Approx(0.5052609427609428).epsilon(1e-12));
  CHECK(out[99] == 1.0);
  CHECK(out[98] == 1.0);
  CHECK(out[97] == doctest::Approx((97.0 - 1.98) / (97.02 - 1.98)).epsilon(1e-12));

  const ScalarVolume pinned(GridShape{100, 1, 1},
                            [] { std::vector<double> w(100); std::iota(w.begin(), w.end(), 0.0); w[0] = 1.98; return w; }());
  CHECK(rescale_percentile(pinned, full_mask(s))[0] == 0.0);
}

TEST_CASE("rescale endpoints, monotonicity and errors") {
  const GridShape s{2, 1, 1};
  const auto two = rescale_percentile(ScalarVolume(s, {0, 10}), full_mask(s), 0.0, 100.0);
  CHECK(two[0] == 0.0);
  CHECK(two[1] == 1.0);

  Rng rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const auto vol = random_brain({8, 8, 8}, rng);
    const auto mask = brain_mask(vol);
    const auto out = rescale_percentile(vol, mask);
    for (std::size_t i = 0; i < vol.size(); ++i) {
      if (!mask[i]) {
        CHECK(out[i] == 0.0);
        continue;
      }
      CHECK(out[i] >= 0.0);
      CHECK(out[i] <= 1.0);
    }
    // Rank order of interior values is preserved.
    for (std::size_t k = 0; k < 200; ++k) {
      const std::size_t a = rng() % vol.size(), b = rng() % vol.size();
      if (!mask[a] || !mask[b]) continue;
      if (out[a] <= 0.0 || out[a] >= 1.0 || out[b] <= 0.0 || out[b] >= 1.0) continue;
      if (vol[a] < vol[b]) CHECK(out[a] < out[b]);
    }
  }
  CHECK_THROWS_AS(rescale_percentile(ScalarVolume(GridShape{3, 1, 1}, {5, 5, 5}), full_mask({3, 1, 1})),
                  DegenerateInput);
  CHECK_THROWS_AS(rescale_percentile(ScalarVolume(s, {0, 10}), full_mask(s), 50.0, 50.0), ConfigError);
}

TEST_CASE("histogram matching against itself is the identity") {
  Rng rng(13);
  const auto vol = random_brain({10, 10, 10}, rng);
  const auto mask = brain_mask(vol);
  const auto out = histogram_match(vol, mask, vol, mask);
  for (std::size_t i = 0; i < vol.size(); ++i) {
    CHECK(std::abs(out[i] - vol[i]) <= 1e-3 * std::abs(vol[i]) + 1e-12);
  }
}

TEST_CASE("histogram matching uniform [0,1] onto uniform [10,20]") {
  Rng rng(17);
  const GridShape s{32, 32, 32};
  std::uniform_real_distribution<double> u(0.0, 1.0), r(10.0, 20.0);
  std::vector<double> a(s.voxels()), b(s.voxels());
  for (auto& x : a) x = u(rng);
  for (auto& x : b) x = r(rng);
  const ScalarVolume src(s, a), ref(s, b);
  const auto out = histogram_match(src, full_mask(s), ref, full_mask(s), 256);
  double worst = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    worst = std::max(worst, std::abs(out[i] - (10.0 + 10.0 * src[i])));
  }
  CHECK(worst <= 0.1);
}

TEST_CASE("histogram matching is monotone and keeps background at zero") {
  Rng rng(19);
  const auto src = random_brain({12, 12, 12}, rng, 1.0, 2.0);
  const auto ref = random_brain({10, 11, 12}, rng, 100.0, 900.0);
  const auto out = histogram_match(src, brain_mask(src), ref, brain_mask(ref), 16);
  const auto mask = brain_mask(src);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (mask[i]) idx.push_back(i); else CHECK(out[i] == 0.0);
  }
  std::sort(idx.begin(), idx.end(), [&](auto x, auto y) { return src[x] < src[y]; });
  for (std::size_t k = 1; k < idx.size(); ++k) CHECK(out[idx[k - 1]] <= out[idx[k]]);

  CHECK_THROWS_AS(histogram_match(src, BinaryMask::empty(src.geometry()), ref, brain_mask(ref)),
                  DegenerateInput);
  CHECK_THROWS_AS(histogram_match(src, mask, ref, brain_mask(ref), 1), ConfigError);
}

TEST_CASE("histogram matching tolerates repeated source quantiles") {
  const GridShape s{8, 1, 1};
  const ScalarVolume src(s, {1, 1, 1, 1, 1, 2, 3, 4});
  const ScalarVolume ref(s, {10, 20, 30, 40, 50, 60, 70, 80});
  const auto out = histogram_match(src, full_mask(s), ref, full_mask(s), 8);
  for (std::size_t i = 1; i < s.voxels(); ++i) CHECK(out[i - 1] <= out[i]);
  CHECK(out[7] == 80.0);
}

TEST_CASE("run_plan composes steps with one brain mask") {
  Rng rng(23);
  const auto vol = random_brain({9, 9, 9}, rng);
  CHECK(run_plan(Plan{}, vol) == vol);

  const Plan plan = Plan::parse("zscore,rescale");
  REQUIRE(plan.steps.size() == 2);
  const auto mask = brain_mask(vol);
  const auto manual = rescale_percentile(zscore_normalize(vol, mask), mask);
  CHECK(run_plan(plan, vol) == manual);

  Plan with_ref = Plan::parse("zscore,histmatch", "unused.nii");
  std::get<HistogramMatch>(with_ref.steps[1]).reference_volume = random_brain({7, 7, 7}, rng);
  const auto& ref = *std::get<HistogramMatch>(with_ref.steps[1]).reference_volume;
  CHECK(run_plan(with_ref, vol) ==
        histogram_match(zscore_normalize(vol, mask), mask, ref, brain_mask(ref), 256));

  const GridShape s{3, 3, 3};
  std::vector<double> flat(27, 0.0);
  for (std::size_t i = 10; i < 15; ++i) flat[i] = 42.0;
  CHECK_THROWS_AS(run_plan(Plan::parse("zscore"), ScalarVolume(s, flat)), DegenerateInput);
}

TEST_CASE("plan parsing and validation") {
  CHECK(Plan::parse("").steps.empty());
  CHECK(Plan::parse(" zscore , rescale ").steps.size() == 2);
  CHECK_THROWS_AS(Plan::parse("zscore,blur"), ConfigError);
  CHECK_THROWS_AS(Plan::parse("histmatch").validate(), ConfigError);
  Plan bad;
  bad.steps.emplace_back(Rescale{50.0, 10.0});
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}
