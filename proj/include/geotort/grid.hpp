#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace geotort {

/// Voxel counts along x, y, z. Linear index is x + nx * (y + ny * z).
struct Dims {
  std::int64_t nx = 0;
  std::int64_t ny = 0;
  std::int64_t nz = 0;

  constexpr std::int64_t voxels() const { return nx * ny * nz; }
  constexpr std::int64_t index(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return x + nx * (y + ny * z);
  }
  constexpr std::array<std::int64_t, 3> decode(std::int64_t i) const {
    const std::int64_t x = i % nx;
    const std::int64_t yz = i / nx;
    return {x, yz % ny, yz / ny};
  }
  constexpr bool contains(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return x >= 0 && y >= 0 && z >= 0 && x < nx && y < ny && z < nz;
  }
  friend constexpr bool operator==(const Dims&, const Dims&) = default;
};

/// Dense 3D array with a physical voxel spacing h. Voxel (x,y,z) has its
/// center at (x*h, y*h, z*h) relative to the grid origin.
template <typename T>
class Grid3 {
 public:
  using value_type = T;

  Grid3() = default;
  Grid3(Dims dims, double h, T fill = T{}) : dims_(dims), h_(h) {
    if (dims.nx <= 0 || dims.ny <= 0 || dims.nz <= 0)
      throw std::invalid_argument("grid dimensions must be positive");
    if (!(h > 0.0)) throw std::invalid_argument("voxel spacing must be positive");
    data_.assign(static_cast<std::size_t>(dims.voxels()), fill);
  }

  const Dims& dims() const { return dims_; }
  double spacing() const { return h_; }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }

  T& operator()(std::int64_t x, std::int64_t y, std::int64_t z) { return data_[dims_.index(x, y, z)]; }
  const T& operator()(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return data_[dims_.index(x, y, z)];
  }
  T& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
  const T& operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  friend bool operator==(const Grid3&, const Grid3&) = default;

 private:
  Dims dims_{};
  double h_ = 1.0;
  std::vector<T> data_;
};

/// Binary phase mask: 1 = voxel belongs to the analysed phase, 0 = background.
using VoxelGrid = Grid3<std::uint8_t>;

/// One label per voxel in 0..phase_count (0 = unassigned/background).
struct PhaseVolume {
  Grid3<std::uint8_t> labels;
  std::uint8_t phase_count = 1;

  friend bool operator==(const PhaseVolume&, const PhaseVolume&) = default;
};

VoxelGrid select_phase(const PhaseVolume& volume, std::uint8_t label);
PhaseVolume as_phase_volume(const VoxelGrid& grid);
std::int64_t count_foreground(const VoxelGrid& grid);

/// Axis-aligned box of voxels starting at lo with the given extent.
struct VoxelBlock {
  std::array<std::int64_t, 3> lo{};
  Dims size{};

  /// Grown by r voxels on every side, then clipped to a grid of the given dims.
  VoxelBlock grown(std::int64_t r, const Dims& bounds) const;
  bool contains(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return x >= lo[0] && y >= lo[1] && z >= lo[2] && x < lo[0] + size.nx && y < lo[1] + size.ny &&
           z < lo[2] + size.nz;
  }
  friend bool operator==(const VoxelBlock&, const VoxelBlock&) = default;
};

template <typename T>
Grid3<T> crop(const Grid3<T>& grid, const VoxelBlock& b) {
  Grid3<T> out(b.size, grid.spacing());
  for (std::int64_t z = 0; z < b.size.nz; ++z)
    for (std::int64_t y = 0; y < b.size.ny; ++y) {
      const T* src = &grid(b.lo[0], b.lo[1] + y, b.lo[2] + z);
      std::copy(src, src + b.size.nx, &out(0, y, z));
    }
  return out;
}

/// Inverse of crop: a grid of the given dims, zero outside the block.
template <typename T>
Grid3<T> embed(const Grid3<T>& part, const VoxelBlock& b, const Dims& dims) {
  Grid3<T> out(dims, part.spacing());
  for (std::int64_t z = 0; z < b.size.nz; ++z)
    for (std::int64_t y = 0; y < b.size.ny; ++y) {
      const T* src = &part(0, y, z);
      std::copy(src, src + b.size.nx, &out(b.lo[0], b.lo[1] + y, b.lo[2] + z));
    }
  return out;
}

class WindowError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Analysis window inside a stored grid. Transport runs along +z from the
/// inlet slice oz to the outlet slice oz + height_n, so the core window spans
/// height_n + 1 slices. Margins extend the window laterally on both sides and
/// below the inlet; nothing is added above the outlet.
struct WindowSpec {
  std::int64_t wx = 0;
  std::int64_t wy = 0;
  std::int64_t height_n = 0;
  std::int64_t margin_lateral = 0;
  std::int64_t margin_below = 0;
  std::int64_t ox = 0;
  std::int64_t oy = 0;
  std::int64_t oz = 0;

  std::int64_t inlet_z() const { return oz; }
  std::int64_t outlet_z() const { return oz + height_n; }
  std::int64_t core_voxels() const { return wx * wy * (height_n + 1); }
  bool in_core(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return x >= ox && x < ox + wx && y >= oy && y < oy + wy && z >= oz && z <= outlet_z();
  }

  /// Throws WindowError unless the core window (and margins, if requested) fit.
  void validate(const Dims& dims, bool include_margins) const;

  VoxelBlock core_block() const { return {{ox, oy, oz}, {wx, wy, height_n + 1}}; }
  /// Core window plus margins: the region paths and inlet connections may use.
  VoxelBlock dilated_block() const {
    return {{ox - margin_lateral, oy - margin_lateral, oz - margin_below},
            {wx + 2 * margin_lateral, wy + 2 * margin_lateral, height_n + 1 + margin_below}};
  }
  /// The same window in the coordinates of a block cropped at origin.
  WindowSpec relative_to(const std::array<std::int64_t, 3>& origin) const {
    WindowSpec w = *this;
    w.ox -= origin[0];
    w.oy -= origin[1];
    w.oz -= origin[2];
    return w;
  }

  /// The same window expressed in the coordinates of extract_window's output.
  WindowSpec relative_to_extract(bool include_margins) const;

  /// Largest margins not exceeding the current ones that fit inside dims.
  WindowSpec clipped_to(const Dims& dims) const;

  /// Core window of lateral size n x n centered in the grid, inlet at inlet_z.
  static WindowSpec centered(const Dims& dims, std::int64_t n, std::int64_t height_n,
                             std::int64_t inlet_z, std::int64_t margin_lateral,
                             std::int64_t margin_below);

  friend bool operator==(const WindowSpec&, const WindowSpec&) = default;
};

/// ceil(N^alpha), the plus-sampling margin for a window of lateral size N.
std::int64_t margin_for(std::int64_t n, double alpha);

/// n with n*h == l; throws std::invalid_argument if l/h is not integral.
std::int64_t height_for_length(double l, double h);

VoxelGrid extract_window(const VoxelGrid& grid, const WindowSpec& w, bool include_margins);

// MV1 volume files -----------------------------------------------------------

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct VolumeHeader {
  static constexpr std::uint32_t kVersion = 1;
  static constexpr std::uint8_t kLittleEndian = 0x01;
  static constexpr std::size_t kSize = 64;

  Dims dims{};
  double h = 1.0;
  std::uint8_t phase_count = 1;
  std::uint32_t version = kVersion;
  std::uint8_t endianness = kLittleEndian;
};

std::array<std::uint8_t, VolumeHeader::kSize> encode_header(const VolumeHeader& header);
VolumeHeader decode_header(std::span<const std::uint8_t> bytes);

PhaseVolume load_volume(const std::filesystem::path& path);
void save_volume(const PhaseVolume& volume, const std::filesystem::path& path);
void save_volume(const VoxelGrid& grid, const std::filesystem::path& path);

}  // namespace geotort
