#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tumorseg/volume.hpp"

namespace tumorseg::nifti {

/// On-disk voxel types this reader and writer understand.
enum class Datatype : std::int16_t {
  kUInt8 = 2,
  kInt16 = 4,
  kFloat32 = 16,
};

/// A decoded NIfTI-1 image: up to four dimensions, scaling already applied.
struct Image {
  Geometry geometry;
  std::size_t channels = 1;  // dim[4]; 1 for plain 3D files
  Datatype datatype = Datatype::kFloat32;
  bool big_endian = false;
  /// Voxel values after slope/intercept, channel-major then x-fastest.
  std::vector<double> values;
};

/// Reads a single-file NIfTI-1 (.nii), optionally gzip-compressed. Throws
/// IoError, FormatError, UnsupportedDatatype, FiniteValueError.
Image read(const std::filesystem::path& path);

/// Reads a 3D scalar volume. Throws FormatError for multi-channel files.
ScalarVolume read_scalar(const std::filesystem::path& path);

/// Reads an integer-typed 3D file as labels. Throws LabelDomainError when a
/// value is outside {0,1,2,3} and UnsupportedDatatype for float files.
LabelVolume read_labels(const std::filesystem::path& path);

/// Reads a 4D file as one ScalarVolume per channel.
std::vector<ScalarVolume> read_channels(const std::filesystem::path& path);

/// Writes a scalar volume. float32 is the default; uint8 and int16 are
/// accepted when every value is an integer in range (UnsupportedDatatype
/// otherwise). A path ending in ".gz" is gzip-compressed.
void write(const ScalarVolume& vol, const std::filesystem::path& path,
           Datatype datatype = Datatype::kFloat32);

/// Writes labels as uint8.
void write(const LabelVolume& vol, const std::filesystem::path& path);

/// Writes channels as a 4D float32 file (dims x, y, z, channels). All
/// channels must share one shape.
void write_channels(std::span<const ScalarVolume> channels,
                    const std::filesystem::path& path);

/// Serializes to the in-memory single-file layout (352-byte header + data),
/// little-endian.
std::vector<std::uint8_t> encode(const Image& image);

/// Parses the in-memory layout, handling either byte order.
Image decode(std::span<const std::uint8_t> bytes);

}  // namespace tumorseg::nifti
