#include "tumorseg/nifti.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "tumorseg/errors.hpp"

namespace tumorseg::nifti {
namespace {

static_assert(std::endian::native == std::endian::little,
              "the NIfTI codec assumes a little-endian host");

constexpr std::size_t kHeaderSize = 348;
constexpr std::size_t kDataOffset = 352;

// Byte offsets of the NIfTI-1 header fields used here.
namespace off {
constexpr std::size_t sizeof_hdr = 0;
constexpr std::size_t dim = 40;
constexpr std::size_t datatype = 70;
constexpr std::size_t bitpix = 72;
constexpr std::size_t pixdim = 76;
constexpr std::size_t vox_offset = 108;
constexpr std::size_t scl_slope = 112;
constexpr std::size_t scl_inter = 116;
constexpr std::size_t xyzt_units = 123;
constexpr std::size_t qform_code = 252;
constexpr std::size_t sform_code = 254;
constexpr std::size_t quatern_b = 256;
constexpr std::size_t qoffset_x = 268;
constexpr std::size_t srow_x = 280;
constexpr std::size_t magic = 344;
}  // namespace off

std::size_t bytes_per_voxel(Datatype dt) {
  switch (dt) {
    case Datatype::kUInt8: return 1;
    case Datatype::kInt16: return 2;
    case Datatype::kFloat32: return 4;
  }
  return 0;
}

class Reader {
 public:
  Reader(std::span<const std::uint8_t> bytes, bool swap) : bytes_(bytes), swap_(swap) {}

  template <typename T>
  T get(std::size_t offset) const {
    std::array<std::uint8_t, sizeof(T)> raw;
    std::memcpy(raw.data(), bytes_.data() + offset, sizeof(T));
    if (swap_) std::reverse(raw.begin(), raw.end());
    return std::bit_cast<T>(raw);
  }

 private:
  std::span<const std::uint8_t> bytes_;
  bool swap_;
};

class Writer {
 public:
  explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}

  template <typename T>
  void put(std::size_t offset, T value) {
    std::memcpy(out_.data() + offset, &value, sizeof(T));
  }

 private:
  std::vector<std::uint8_t>& out_;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  if (path.empty()) throw IoError("empty input path");
  gzFile f = gzopen(path.c_str(), "rb");
  if (f == nullptr) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> out;
  std::array<std::uint8_t, 1 << 16> buf;
  for (;;) {
    const int n = gzread(f, buf.data(), static_cast<unsigned>(buf.size()));
    if (n < 0) {
      gzclose(f);
      throw IoError("read failure in " + path.string());
    }
    if (n == 0) break;
    out.insert(out.end(), buf.begin(), buf.begin() + n);
  }
  gzclose(f);
  return out;
}

bool is_gzip_path(const std::filesystem::path& path) { return path.extension() == ".gz"; }

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.empty()) throw IoError("empty output path");
  if (is_gzip_path(path)) {
    gzFile f = gzopen(path.c_str(), "wb6");
    if (f == nullptr) throw IoError("cannot open " + path.string() + " for writing");
    const int n = gzwrite(f, bytes.data(), static_cast<unsigned>(bytes.size()));
    const int rc = gzclose(f);
    if (n != static_cast<int>(bytes.size()) || rc != Z_OK) {
      throw IoError("write failure in " + path.string());
    }
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failure in " + path.string());
}

double raw_value(const std::uint8_t* p, Datatype dt, bool swap) {
  auto load = [&]<typename T>(T) {
    std::array<std::uint8_t, sizeof(T)> raw;
    std::memcpy(raw.data(), p, sizeof(T));
    if (swap) std::reverse(raw.begin(), raw.end());
    return static_cast<double>(std::bit_cast<T>(raw));
  };
  switch (dt) {
    case Datatype::kUInt8: return load(std::uint8_t{});
    case Datatype::kInt16: return load(std::int16_t{});
    case Datatype::kFloat32: return load(float{});
  }
  return 0.0;
}

Image to_image(const Geometry& g, std::size_t channels, Datatype dt,
               std::vector<double> values) {
  Image img;
  img.geometry = g;
  img.channels = channels;
  img.datatype = dt;
  img.values = std::move(values);
  return img;
}

void check_encodable(const Image& image) {
  if (image.datatype == Datatype::kFloat32) {
    for (double v : image.values) {
      if (!std::isfinite(static_cast<float>(v))) {
        throw UnsupportedDatatype("value " + std::to_string(v) + " overflows float32");
      }
    }
    return;
  }
  const double lo = image.datatype == Datatype::kUInt8 ? 0.0 : -32768.0;
  const double hi = image.datatype == Datatype::kUInt8 ? 255.0 : 32767.0;
  for (double v : image.values) {
    if (v != std::nearbyint(v) || v < lo || v > hi) {
      throw UnsupportedDatatype("value " + std::to_string(v) +
                                " is not representable in the integer output type");
    }
  }
}

}  // namespace

std::vector<std::uint8_t> encode(const Image& image) {
  validate_geometry(image.geometry);
  const auto& shape = image.geometry.shape;
  if (image.channels == 0 || image.values.size() != shape.voxels() * image.channels) {
    throw ShapeError("image buffer does not match its dimensions");
  }
  check_encodable(image);

  const std::size_t bpv = bytes_per_voxel(image.datatype);
  std::vector<std::uint8_t> out(kDataOffset + image.values.size() * bpv, 0);
  Writer w(out);
  w.put<std::int32_t>(off::sizeof_hdr, static_cast<std::int32_t>(kHeaderSize));

  const bool four_d = image.channels > 1;
  w.put<std::int16_t>(off::dim, four_d ? 4 : 3);
  const std::array<std::size_t, 4> dims{shape.dx, shape.dy, shape.dz, image.channels};
  for (std::size_t k = 0; k < 7; ++k) {
    const std::size_t d = k < 4 ? dims[k] : 1;
    if (d > 32767) throw ShapeError("dimension exceeds the NIfTI-1 limit");
    w.put<std::int16_t>(off::dim + 2 * (k + 1), static_cast<std::int16_t>(d));
  }
  w.put<std::int16_t>(off::datatype, static_cast<std::int16_t>(image.datatype));
  w.put<std::int16_t>(off::bitpix, static_cast<std::int16_t>(bpv * 8));

  const auto& orient = image.geometry.orientation;
  w.put<float>(off::pixdim, orient.qfac);
  for (std::size_t k = 0; k < 3; ++k) {
    w.put<float>(off::pixdim + 4 * (k + 1), static_cast<float>(image.geometry.spacing[k]));
  }
  for (std::size_t k = 4; k < 8; ++k) w.put<float>(off::pixdim + 4 * k, 1.0f);
  w.put<float>(off::vox_offset, static_cast<float>(kDataOffset));
  w.put<float>(off::scl_slope, 1.0f);
  w.put<float>(off::scl_inter, 0.0f);
  w.put<std::uint8_t>(off::xyzt_units, 2);  // NIFTI_UNITS_MM
  w.put<std::int16_t>(off::qform_code, orient.qform_code);
  w.put<std::int16_t>(off::sform_code, orient.sform_code);
  for (std::size_t k = 0; k < 3; ++k) {
    w.put<float>(off::quatern_b + 4 * k, orient.quatern[k]);
    w.put<float>(off::qoffset_x + 4 * k, orient.qoffset[k]);
    for (std::size_t c = 0; c < 4; ++c) {
      w.put<float>(off::srow_x + 16 * k + 4 * c, orient.srow[k][c]);
    }
  }
  std::memcpy(out.data() + off::magic, "n+1\0", 4);

  std::uint8_t* p = out.data() + kDataOffset;
  for (double v : image.values) {
    switch (image.datatype) {
      case Datatype::kUInt8: *p = static_cast<std::uint8_t>(v); break;
      case Datatype::kInt16: {
        const auto s = static_cast<std::int16_t>(v);
        std::memcpy(p, &s, 2);
        break;
      }
      case Datatype::kFloat32: {
        const auto f = static_cast<float>(v);
        std::memcpy(p, &f, 4);
        break;
      }
    }
    p += bpv;
  }
  return out;
}

Image decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) throw FormatError("file shorter than a NIfTI-1 header");

  std::int32_t sizeof_hdr;
  std::memcpy(&sizeof_hdr, bytes.data(), 4);
  bool swap = false;
  if (sizeof_hdr != static_cast<std::int32_t>(kHeaderSize)) {
    const auto swapped = static_cast<std::int32_t>(
        ((static_cast<std::uint32_t>(sizeof_hdr) & 0xFFu) << 24) |
        ((static_cast<std::uint32_t>(sizeof_hdr) & 0xFF00u) << 8) |
        ((static_cast<std::uint32_t>(sizeof_hdr) >> 8) & 0xFF00u) |
        (static_cast<std::uint32_t>(sizeof_hdr) >> 24));
    if (swapped != static_cast<std::int32_t>(kHeaderSize)) {
      throw FormatError("sizeof_hdr is not 348 in either byte order");
    }
    swap = true;
  }
  if (std::memcmp(bytes.data() + off::magic, "n+1\0", 4) != 0) {
    throw FormatError("missing single-file NIfTI-1 magic \"n+1\"");
  }
  const Reader r(bytes, swap);

  const auto ndim = r.get<std::int16_t>(off::dim);
  if (ndim < 1 || ndim > 7) throw FormatError("dim[0] out of range");
  std::array<std::size_t, 7> dims{};
  for (std::size_t k = 0; k < 7; ++k) {
    const auto d = r.get<std::int16_t>(off::dim + 2 * (k + 1));
    if (static_cast<int>(k) < ndim) {
      if (d < 1) throw FormatError("non-positive dimension in header");
      dims[k] = static_cast<std::size_t>(d);
    } else {
      dims[k] = 1;
    }
  }
  for (std::size_t k = 4; k < 7; ++k) {
    if (dims[k] != 1) throw FormatError("images beyond four dimensions are not supported");
  }

  const auto dt_code = r.get<std::int16_t>(off::datatype);
  Datatype dt;
  switch (dt_code) {
    case 2: dt = Datatype::kUInt8; break;
    case 4: dt = Datatype::kInt16; break;
    case 16: dt = Datatype::kFloat32; break;
    default:
      throw UnsupportedDatatype("NIfTI datatype code " + std::to_string(dt_code) +
                                " is not supported (uint8, int16, float32 only)");
  }

  Geometry g;
  g.shape = {dims[0], dims[1], dims[2]};
  g.orientation.qfac = r.get<float>(off::pixdim);
  for (std::size_t k = 0; k < 3; ++k) {
    const float s = r.get<float>(off::pixdim + 4 * (k + 1));
    g.spacing[k] = s > 0.0f && std::isfinite(s) ? static_cast<double>(s) : 1.0;
  }
  g.orientation.qform_code = r.get<std::int16_t>(off::qform_code);
  g.orientation.sform_code = r.get<std::int16_t>(off::sform_code);
  for (std::size_t k = 0; k < 3; ++k) {
    g.orientation.quatern[k] = r.get<float>(off::quatern_b + 4 * k);
    g.orientation.qoffset[k] = r.get<float>(off::qoffset_x + 4 * k);
    for (std::size_t c = 0; c < 4; ++c) {
      g.orientation.srow[k][c] = r.get<float>(off::srow_x + 16 * k + 4 * c);
    }
  }

  const float vox_offset_f = r.get<float>(off::vox_offset);
  if (!(vox_offset_f >= static_cast<float>(kHeaderSize))) {
    throw FormatError("vox_offset points inside the header");
  }
  const auto vox_offset = static_cast<std::size_t>(vox_offset_f);
  const std::size_t count = g.shape.voxels() * dims[3];
  const std::size_t bpv = bytes_per_voxel(dt);
  if (bytes.size() < vox_offset + count * bpv) {
    throw FormatError("file is truncated: expected " + std::to_string(count * bpv) +
                      " data bytes");
  }

  const float slope = r.get<float>(off::scl_slope);
  const float inter = r.get<float>(off::scl_inter);
  const bool scaled = slope != 0.0f && std::isfinite(slope) && std::isfinite(inter) &&
                      !(slope == 1.0f && inter == 0.0f);

  std::vector<double> values(count);
  const std::uint8_t* p = bytes.data() + vox_offset;
  for (std::size_t i = 0; i < count; ++i, p += bpv) {
    double v = raw_value(p, dt, swap);
    if (scaled) v = static_cast<double>(slope) * v + static_cast<double>(inter);
    if (!std::isfinite(v)) {
      throw FiniteValueError("non-finite voxel value at index " + std::to_string(i));
    }
    values[i] = v;
  }

  Image img = to_image(g, dims[3], dt, std::move(values));
  img.big_endian = swap;
  return img;
}

Image read(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode(bytes);
  } catch (const InputError& e) {
    // Keep the error class; prefix the offending path.
    const std::string msg = path.string() + ": " + e.what();
    if (dynamic_cast<const UnsupportedDatatype*>(&e)) throw UnsupportedDatatype(msg);
    if (dynamic_cast<const FiniteValueError*>(&e)) throw FiniteValueError(msg);
    if (dynamic_cast<const ShapeError*>(&e)) throw ShapeError(msg);
    throw FormatError(msg);
  }
}

ScalarVolume read_scalar(const std::filesystem::path& path) {
  Image img = read(path);
  if (img.channels != 1) {
    throw FormatError(path.string() + ": expected a 3D volume, found " +
                      std::to_string(img.channels) + " channels");
  }
  return ScalarVolume(img.geometry, std::move(img.values));
}

LabelVolume read_labels(const std::filesystem::path& path) {
  Image img = read(path);
  if (img.channels != 1) {
    throw FormatError(path.string() + ": expected a 3D label volume");
  }
  if (img.datatype == Datatype::kFloat32) {
    throw UnsupportedDatatype(path.string() + ": label volumes must be integer-typed");
  }
  std::vector<std::uint8_t> labels(img.values.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double v = img.values[i];
    if (v != 0.0 && v != 1.0 && v != 2.0 && v != 3.0) {
      throw LabelDomainError(path.string() + ": value " + std::to_string(v) + " at voxel " +
                             std::to_string(i) + " is not a tumor label");
    }
    labels[i] = static_cast<std::uint8_t>(v);
  }
  return LabelVolume(img.geometry, std::move(labels));
}

std::vector<ScalarVolume> read_channels(const std::filesystem::path& path) {
  Image img = read(path);
  const std::size_t n = img.geometry.shape.voxels();
  std::vector<ScalarVolume> out;
  out.reserve(img.channels);
  for (std::size_t c = 0; c < img.channels; ++c) {
    const auto first = img.values.begin() + static_cast<std::ptrdiff_t>(c * n);
    out.emplace_back(img.geometry,
                     std::vector<double>(first, first + static_cast<std::ptrdiff_t>(n)));
  }
  return out;
}

void write(const ScalarVolume& vol, const std::filesystem::path& path, Datatype datatype) {
  const auto data = vol.data();
  write_file(path, encode(to_image(vol.geometry(), 1, datatype,
                                   std::vector<double>(data.begin(), data.end()))));
}

void write(const LabelVolume& vol, const std::filesystem::path& path) {
  const auto data = vol.data();
  write_file(path, encode(to_image(vol.geometry(), 1, Datatype::kUInt8,
                                   std::vector<double>(data.begin(), data.end()))));
}

void write_channels(std::span<const ScalarVolume> channels,
                    const std::filesystem::path& path) {
  if (channels.empty()) throw ShapeError("no channels to write");
  std::vector<double> values;
  values.reserve(channels.size() * channels.front().size());
  for (const auto& ch : channels) {
    require_same_shape(channels.front().shape(), ch.shape(), "write_channels");
    values.insert(values.end(), ch.data().begin(), ch.data().end());
  }
  write_file(path, encode(to_image(channels.front().geometry(), channels.size(),
                                   Datatype::kFloat32, std::move(values))));
}

}  // namespace tumorseg::nifti
