#include "geotort/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace geotort {

VoxelGrid select_phase(const PhaseVolume& volume, std::uint8_t label) {
  const auto& labels = volume.labels;
  VoxelGrid out(labels.dims(), labels.spacing());
  auto src = labels.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] == label ? 1 : 0;
  return out;
}

PhaseVolume as_phase_volume(const VoxelGrid& grid) {
  PhaseVolume out{grid, 1};
  for (auto& v : out.labels.data()) v = v ? 1 : 0;
  return out;
}

std::int64_t count_foreground(const VoxelGrid& grid) {
  auto d = grid.data();
  return std::count_if(d.begin(), d.end(), [](std::uint8_t v) { return v != 0; });
}

VoxelBlock VoxelBlock::grown(std::int64_t r, const Dims& bounds) const {
  const std::array<std::int64_t, 3> hi{lo[0] + size.nx + r, lo[1] + size.ny + r, lo[2] + size.nz + r};
  const std::array<std::int64_t, 3> limit{bounds.nx, bounds.ny, bounds.nz};
  VoxelBlock out;
  std::array<std::int64_t, 3> ext{};
  for (int a = 0; a < 3; ++a) {
    out.lo[a] = std::max<std::int64_t>(lo[a] - r, 0);
    ext[a] = std::min(hi[a], limit[a]) - out.lo[a];
  }
  out.size = {ext[0], ext[1], ext[2]};
  return out;
}

void WindowSpec::validate(const Dims& dims, bool include_margins) const {
  if (wx <= 0 || wy <= 0) throw WindowError("window lateral size must be positive");
  if (height_n < 1) throw WindowError("window height must be at least one voxel step");
  if (margin_lateral < 0 || margin_below < 0) throw WindowError("window margins must be non-negative");
  const std::int64_t ml = include_margins ? margin_lateral : 0;
  const std::int64_t mb = include_margins ? margin_below : 0;
  if (ox - ml < 0 || oy - ml < 0 || oz - mb < 0 || ox + wx + ml > dims.nx || oy + wy + ml > dims.ny ||
      outlet_z() >= dims.nz) {
    throw WindowError("window does not fit inside the grid");
  }
}

WindowSpec WindowSpec::relative_to_extract(bool include_margins) const {
  WindowSpec w = *this;
  w.ox = include_margins ? margin_lateral : 0;
  w.oy = include_margins ? margin_lateral : 0;
  w.oz = include_margins ? margin_below : 0;
  if (!include_margins) w.margin_lateral = w.margin_below = 0;
  return w;
}

WindowSpec WindowSpec::clipped_to(const Dims& dims) const {
  WindowSpec w = *this;
  w.margin_lateral = std::min({margin_lateral, ox, oy, dims.nx - ox - wx, dims.ny - oy - wy});
  w.margin_below = std::min(margin_below, oz);
  w.margin_lateral = std::max<std::int64_t>(w.margin_lateral, 0);
  w.margin_below = std::max<std::int64_t>(w.margin_below, 0);
  return w;
}

WindowSpec WindowSpec::centered(const Dims& dims, std::int64_t n, std::int64_t height_n, std::int64_t inlet_z,
                                std::int64_t margin_lateral, std::int64_t margin_below) {
  WindowSpec w;
  w.wx = n;
  w.wy = n;
  w.height_n = height_n;
  w.margin_lateral = margin_lateral;
  w.margin_below = margin_below;
  w.ox = (dims.nx - n) / 2;
  w.oy = (dims.ny - n) / 2;
  w.oz = inlet_z;
  return w;
}

std::int64_t margin_for(std::int64_t n, double alpha) {
  if (n <= 0) throw std::invalid_argument("window size must be positive");
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be non-negative");
  const double m = std::pow(static_cast<double>(n), alpha);
  // Exact powers such as 16^0.5 must not round up to the next integer.
  const double nearest = std::round(m);
  if (std::abs(m - nearest) <= 1e-9 * std::max(1.0, m)) return static_cast<std::int64_t>(nearest);
  return static_cast<std::int64_t>(std::ceil(m));
}

std::int64_t height_for_length(double l, double h) {
  if (!(h > 0.0) || !(l > 0.0)) throw std::invalid_argument("transport length and spacing must be positive");
  const double ratio = l / h;
  const double n = std::round(ratio);
  if (n < 1.0 || std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio))
    throw std::invalid_argument("transport length l must be an integer multiple of h");
  return static_cast<std::int64_t>(n);
}

VoxelGrid extract_window(const VoxelGrid& grid, const WindowSpec& w, bool include_margins) {
  w.validate(grid.dims(), include_margins);
  return crop(grid, include_margins ? w.dilated_block() : w.core_block());
}

// MV1 ------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'M', 'V', 'O', 'X'};

template <typename U>
void put_le(std::uint8_t* dst, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) dst[i] = static_cast<std::uint8_t>(value >> (8 * i));
}

template <typename U>
U get_le(const std::uint8_t* src) {
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(src[i]) << (8 * i);
  return value;
}

}  // namespace

std::array<std::uint8_t, VolumeHeader::kSize> encode_header(const VolumeHeader& header) {
  std::array<std::uint8_t, VolumeHeader::kSize> bytes{};
  std::memcpy(bytes.data(), kMagic, 4);
  put_le<std::uint32_t>(bytes.data() + 4, header.version);
  put_le<std::uint32_t>(bytes.data() + 8, static_cast<std::uint32_t>(header.dims.nx));
  put_le<std::uint32_t>(bytes.data() + 12, static_cast<std::uint32_t>(header.dims.ny));
  put_le<std::uint32_t>(bytes.data() + 16, static_cast<std::uint32_t>(header.dims.nz));
  put_le<std::uint64_t>(bytes.data() + 20, std::bit_cast<std::uint64_t>(header.h));
  bytes[28] = header.phase_count;
  bytes[29] = header.endianness;
  return bytes;
}

VolumeHeader decode_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < VolumeHeader::kSize) throw FormatError("truncated MV1 header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("not an MV1 volume (bad magic)");
  VolumeHeader header;
  header.version = get_le<std::uint32_t>(bytes.data() + 4);
  if (header.version != VolumeHeader::kVersion)
    throw FormatError("unsupported MV1 version " + std::to_string(header.version));
  header.endianness = bytes[29];
  if (header.endianness != VolumeHeader::kLittleEndian) throw FormatError("unsupported MV1 byte order marker");
  header.dims = {get_le<std::uint32_t>(bytes.data() + 8), get_le<std::uint32_t>(bytes.data() + 12),
                 get_le<std::uint32_t>(bytes.data() + 16)};
  header.h = std::bit_cast<double>(get_le<std::uint64_t>(bytes.data() + 20));
  header.phase_count = bytes[28];
  if (header.dims.nx == 0 || header.dims.ny == 0 || header.dims.nz == 0)
    throw FormatError("MV1 header has a zero dimension");
  if (!(header.h > 0.0) || !std::isfinite(header.h)) throw FormatError("MV1 header has invalid spacing");
  return header;
}

PhaseVolume load_volume(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open volume file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const VolumeHeader header = decode_header(bytes);
  const auto expected = static_cast<std::uint64_t>(header.dims.voxels());
  if (bytes.size() - VolumeHeader::kSize != expected)
    throw FormatError("MV1 payload size mismatch: expected " + std::to_string(expected) + " bytes, found " +
                      std::to_string(bytes.size() - VolumeHeader::kSize));
  PhaseVolume volume{Grid3<std::uint8_t>(header.dims, header.h), header.phase_count};
  auto dst = volume.labels.data();
  std::copy(bytes.begin() + VolumeHeader::kSize, bytes.end(), dst.begin());
  const std::uint8_t max_label = std::max<std::uint8_t>(header.phase_count, 1);
  if (std::any_of(dst.begin(), dst.end(), [&](std::uint8_t v) { return v > max_label; }))
    throw FormatError("MV1 payload contains labels above phase_count");
  return volume;
}

void save_volume(const PhaseVolume& volume, const std::filesystem::path& path) {
  VolumeHeader header;
  header.dims = volume.labels.dims();
  header.h = volume.labels.spacing();
  header.phase_count = volume.phase_count;
  const auto head = encode_header(header);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write volume file " + path.string());
  out.write(reinterpret_cast<const char*>(head.data()), head.size());
  auto payload = volume.labels.data();
  out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  if (!out) throw std::runtime_error("I/O error while writing " + path.string());
}

void save_volume(const VoxelGrid& grid, const std::filesystem::path& path) {
  save_volume(as_phase_volume(grid), path);
}

}  // namespace geotort
