#pragma once

#include <cmath>
#include <random>

#include "tumorseg/volume.hpp"

namespace bench {

inline tumorseg::BinaryMask random_mask(std::size_t n, double density, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution on(density);
  std::vector<std::uint8_t> v(n * n * n);
  for (auto& x : v) x = on(rng);
  return tumorseg::BinaryMask(tumorseg::GridShape{n, n, n}, std::move(v));
}

/// Nested spheres (WT > TC > ET) plus scattered single-voxel specks.
inline tumorseg::LabelVolume tumor(std::size_t n, std::uint64_t seed) {
  const tumorseg::GridShape s{n, n, n};
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution speck(0.002);
  std::vector<std::uint8_t> v(s.voxels(), 0);
  const double c = static_cast<double>(n) / 2.0, r = static_cast<double>(n) / 4.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto p = s.coords(i);
    const double d = std::hypot(p[0] - c, p[1] - c, p[2] - c) / r;
    v[i] = d <= 0.4 ? 1 : d <= 0.7 ? 3 : d <= 1.0 ? 2 : 0;
    if (v[i] == 0 && speck(rng)) v[i] = 2;
  }
  return tumorseg::LabelVolume(s, std::move(v));
}

}  // namespace bench
