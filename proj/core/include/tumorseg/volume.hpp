#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace tumorseg {

/// Voxel counts per axis. Flat indices are x-fastest:
/// i = x + dx * (y + dy * z).
struct GridShape {
  std::size_t dx = 0;
  std::size_t dy = 0;
  std::size_t dz = 0;

  constexpr std::size_t voxels() const noexcept { return dx * dy * dz; }
  constexpr std::size_t index(std::size_t x, std::size_t y,
                              std::size_t z) const noexcept {
    return x + dx * (y + dy * z);
  }
  constexpr std::array<std::size_t, 3> coords(std::size_t i) const noexcept {
    return {i % dx, (i / dx) % dy, i / (dx * dy)};
  }
  friend constexpr bool operator==(const GridShape&, const GridShape&) = default;
};

/// Millimetres per voxel along x, y, z.
using Spacing = std::array<double, 3>;

/// NIfTI orientation fields. Carried through I/O untouched; no computation
/// reads them.
struct Orientation {
  std::int16_t qform_code = 0;
  std::int16_t sform_code = 0;
  float qfac = 1.0f;
  std::array<float, 3> quatern{};
  std::array<float, 3> qoffset{};
  std::array<std::array<float, 4>, 3> srow{};

  friend bool operator==(const Orientation&, const Orientation&) = default;
};

struct Geometry {
  GridShape shape;
  Spacing spacing{1.0, 1.0, 1.0};
  Orientation orientation;

  friend bool operator==(const Geometry&, const Geometry&) = default;
};

/// Validates a geometry: positive extents and positive spacing.
/// Throws ShapeError otherwise.
void validate_geometry(const Geometry& g);

/// Immutable dense 3D grid of T in x-fastest order.
template <typename T>
class VoxelGrid {
 public:
  using value_type = T;

  VoxelGrid() = default;

  const Geometry& geometry() const noexcept { return geometry_; }
  const GridShape& shape() const noexcept { return geometry_.shape; }
  const Spacing& spacing() const noexcept { return geometry_.spacing; }
  std::size_t size() const noexcept { return data_.size(); }
  std::span<const T> data() const noexcept { return data_; }

  const T& operator[](std::size_t i) const noexcept { return data_[i]; }
  const T& at(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    return data_[geometry_.shape.index(x, y, z)];
  }

  /// Moves the buffer out, leaving this grid empty.
  std::vector<T> release() && { return std::move(data_); }

  friend bool operator==(const VoxelGrid&, const VoxelGrid&) = default;

 protected:
  VoxelGrid(Geometry geometry, std::vector<T> data);

  Geometry geometry_;
  std::vector<T> data_;
};

/// Real-valued intensities or probabilities. All values are finite.
class ScalarVolume : public VoxelGrid<double> {
 public:
  ScalarVolume() = default;
  ScalarVolume(Geometry geometry, std::vector<double> data);
  ScalarVolume(GridShape shape, std::vector<double> data)
      : ScalarVolume(Geometry{shape, {1.0, 1.0, 1.0}, {}}, std::move(data)) {}

  static ScalarVolume filled(const Geometry& geometry, double value);
};

/// Disjoint tumor labels.
enum class Label : std::uint8_t {
  kBackground = 0,
  kNecrosis = 1,  // NCR
  kEdema = 2,     // ED
  kEnhancing = 3, // ET
};

/// Voxel labels, each in {0, 1, 2, 3}.
class LabelVolume : public VoxelGrid<std::uint8_t> {
 public:
  LabelVolume() = default;
  /// Throws LabelDomainError if any value is outside {0,1,2,3}.
  LabelVolume(Geometry geometry, std::vector<std::uint8_t> data);
  LabelVolume(GridShape shape, std::vector<std::uint8_t> data)
      : LabelVolume(Geometry{shape, {1.0, 1.0, 1.0}, {}}, std::move(data)) {}

  Label label(std::size_t i) const noexcept { return static_cast<Label>(data_[i]); }
};

/// Boolean mask stored one byte per voxel (0 or 1).
class BinaryMask : public VoxelGrid<std::uint8_t> {
 public:
  BinaryMask() = default;
  /// Nonzero input bytes are normalized to 1.
  BinaryMask(Geometry geometry, std::vector<std::uint8_t> data);
  BinaryMask(GridShape shape, std::vector<std::uint8_t> data)
      : BinaryMask(Geometry{shape, {1.0, 1.0, 1.0}, {}}, std::move(data)) {}

  static BinaryMask empty(const Geometry& geometry);

  bool test(std::size_t i) const noexcept { return data_[i] != 0; }
  std::size_t count() const noexcept;
};

BinaryMask operator&(const BinaryMask& a, const BinaryMask& b);
BinaryMask operator|(const BinaryMask& a, const BinaryMask& b);
/// a and not b.
BinaryMask difference(const BinaryMask& a, const BinaryMask& b);
/// True when every voxel set in `inner` is also set in `outer`.
bool is_subset(const BinaryMask& inner, const BinaryMask& outer);
/// The mask as 0.0 / 1.0 intensities.
ScalarVolume to_scalar(const BinaryMask& m);

/// Throws ShapeError when the two shapes differ. `what` names the operation.
void require_same_shape(const GridShape& a, const GridShape& b, const char* what);

}  // namespace tumorseg
