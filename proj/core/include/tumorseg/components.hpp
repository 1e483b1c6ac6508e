#pragma once

#include <cstdint>
#include <vector>

#include "tumorseg/volume.hpp"

namespace tumorseg {

/// Voxel adjacency: shared faces (6), faces or edges (18), or any contact (26).
enum class Connectivity : int { k6 = 6, k18 = 18, k26 = 26 };

/// Throws ConfigError unless value is 6, 18 or 26.
Connectivity connectivity_from_int(int value);

/// Offsets (dx, dy, dz) of the neighbors under `c`, excluding the origin.
std::vector<std::array<int, 3>> neighbor_offsets(Connectivity c);

/// Component ids per voxel: 0 is background, foreground ids run 1..count.
struct ComponentLabeling {
  Geometry geometry;
  std::vector<std::uint32_t> ids;
  std::uint32_t count = 0;
  /// sizes[k] is the voxel count of component k + 1.
  std::vector<std::size_t> sizes;

  const GridShape& shape() const noexcept { return geometry.shape; }
  /// The voxels of one component as a mask.
  BinaryMask component_mask(std::uint32_t id) const;
  /// Union of the components whose ids are flagged in `keep` (indexed by id).
  BinaryMask select(const std::vector<bool>& keep) const;
};

/// Labels the foreground of `mask`. Ids follow the order in which each
/// component's first voxel appears in storage order.
ComponentLabeling connected_components(const BinaryMask& mask,
                                       Connectivity connectivity = Connectivity::k26);

}  // namespace tumorseg
