#include "tumorseg/volume.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tumorseg/errors.hpp"

namespace tumorseg {

void validate_geometry(const Geometry& g) {
  if (g.shape.dx == 0 || g.shape.dy == 0 || g.shape.dz == 0) {
    throw ShapeError("grid shape must be positive along every axis");
  }
  for (double s : g.spacing) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw ShapeError("voxel spacing must be positive and finite");
    }
  }
}

void require_same_shape(const GridShape& a, const GridShape& b, const char* what) {
  if (a != b) {
    throw ShapeError(std::string(what) + ": shape mismatch (" + std::to_string(a.dx) +
                     "x" + std::to_string(a.dy) + "x" + std::to_string(a.dz) + " vs " +
                     std::to_string(b.dx) + "x" + std::to_string(b.dy) + "x" +
                     std::to_string(b.dz) + ")");
  }
}

template <typename T>
VoxelGrid<T>::VoxelGrid(Geometry geometry, std::vector<T> data)
    : geometry_(std::move(geometry)), data_(std::move(data)) {
  validate_geometry(geometry_);
  if (data_.size() != geometry_.shape.voxels()) {
    throw ShapeError("buffer length " + std::to_string(data_.size()) +
                     " does not match voxel count " +
                     std::to_string(geometry_.shape.voxels()));
  }
}

template class VoxelGrid<double>;
template class VoxelGrid<std::uint8_t>;

ScalarVolume::ScalarVolume(Geometry geometry, std::vector<double> data)
    : VoxelGrid(std::move(geometry), std::move(data)) {
  for (double v : data_) {
    if (!std::isfinite(v)) throw FiniteValueError("scalar volume contains NaN or Inf");
  }
}

ScalarVolume ScalarVolume::filled(const Geometry& geometry, double value) {
  return ScalarVolume(geometry, std::vector<double>(geometry.shape.voxels(), value));
}

LabelVolume::LabelVolume(Geometry geometry, std::vector<std::uint8_t> data)
    : VoxelGrid(std::move(geometry), std::move(data)) {
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (data_[i] > 3) {
      throw LabelDomainError("label " + std::to_string(data_[i]) + " at voxel " +
                             std::to_string(i) + " is outside {0,1,2,3}");
    }
  }
}

BinaryMask::BinaryMask(Geometry geometry, std::vector<std::uint8_t> data)
    : VoxelGrid(std::move(geometry), std::move(data)) {
  for (auto& v : data_) v = v != 0;
}

BinaryMask BinaryMask::empty(const Geometry& geometry) {
  return BinaryMask(geometry, std::vector<std::uint8_t>(geometry.shape.voxels(), 0));
}

std::size_t BinaryMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

namespace {

template <typename Op>
BinaryMask combine(const BinaryMask& a, const BinaryMask& b, const char* what, Op op) {
  require_same_shape(a.shape(), b.shape(), what);
  std::vector<std::uint8_t> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(a[i], b[i]);
  return BinaryMask(a.geometry(), std::move(out));
}

}  // namespace

BinaryMask operator&(const BinaryMask& a, const BinaryMask& b) {
  return combine(a, b, "mask intersection",
                 [](std::uint8_t x, std::uint8_t y) { return std::uint8_t(x & y); });
}

BinaryMask operator|(const BinaryMask& a, const BinaryMask& b) {
  return combine(a, b, "mask union",
                 [](std::uint8_t x, std::uint8_t y) { return std::uint8_t(x | y); });
}

BinaryMask difference(const BinaryMask& a, const BinaryMask& b) {
  return combine(a, b, "mask difference",
                 [](std::uint8_t x, std::uint8_t y) { return std::uint8_t(x & !y); });
}

bool is_subset(const BinaryMask& inner, const BinaryMask& outer) {
  require_same_shape(inner.shape(), outer.shape(), "mask subset test");
  for (std::size_t i = 0; i < inner.size(); ++i) {
    if (inner[i] && !outer[i]) return false;
  }
  return true;
}

ScalarVolume to_scalar(const BinaryMask& m) {
  std::vector<double> out(m.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = m[i] ? 1.0 : 0.0;
  return ScalarVolume(m.geometry(), std::move(out));
}

}  // namespace tumorseg
