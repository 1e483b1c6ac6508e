#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "tumorseg/volume.hpp"

namespace tumorseg::testing {

using Rng = std::mt19937_64;

inline LabelVolume random_labels(const GridShape& shape, Rng& rng) {
  std::uniform_int_distribution<int> d(0, 3);
  std::vector<std::uint8_t> v(shape.voxels());
  for (auto& x : v) x = static_cast<std::uint8_t>(d(rng));
  return LabelVolume(shape, std::move(v));
}

inline BinaryMask random_mask(const GridShape& shape, double density, Rng& rng) {
  std::bernoulli_distribution d(density);
  std::vector<std::uint8_t> v(shape.voxels());
  for (auto& x : v) x = d(rng);
  return BinaryMask(shape, std::move(v));
}

/// Values in [lo, hi) rounded to float32 so they survive a float32 file.
inline ScalarVolume random_scalar(const GridShape& shape, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(shape.voxels());
  for (auto& x : v) x = static_cast<double>(static_cast<float>(d(rng)));
  return ScalarVolume(shape, std::move(v));
}

/// Sets an axis-aligned box [x0,x1) x [y0,y1) x [z0,z1) to `value`.
template <typename T>
void fill_box(std::vector<T>& buf, const GridShape& s, std::size_t x0, std::size_t x1,
              std::size_t y0, std::size_t y1, std::size_t z0, std::size_t z1, T value) {
  for (std::size_t z = z0; z < z1; ++z)
    for (std::size_t y = y0; y < y1; ++y)
      for (std::size_t x = x0; x < x1; ++x) buf[s.index(x, y, z)] = value;
}

}  // namespace tumorseg::testing
