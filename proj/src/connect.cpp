#include "geotort/connect.hpp"

#include <array>
#include <vector>

namespace geotort {

namespace {

class UnionFind {
 public:
  std::uint32_t make() {
    parent_.push_back(static_cast<std::uint32_t>(parent_.size()));
    return parent_.back();
  }
  std::uint32_t find(std::uint32_t a) {
    std::uint32_t root = a;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[a] != root) {
      const std::uint32_t next = parent_[a];
      parent_[a] = root;
      a = next;
    }
    return root;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    // Keep the smaller id as root.
    if (a < b)
      parent_[b] = a;
    else
      parent_[a] = b;
  }
  std::size_t size() const { return parent_.size(); }

 private:
  std::vector<std::uint32_t> parent_;
};

struct Offset {
  int dx, dy, dz;
};

// The 13 neighbors that precede a voxel in the raster scan.
constexpr std::array<Offset, 13> kBackward = {{{-1, -1, -1}, {0, -1, -1}, {1, -1, -1}, {-1, 0, -1}, {0, 0, -1},
                                               {1, 0, -1}, {-1, 1, -1}, {0, 1, -1}, {1, 1, -1}, {-1, -1, 0},
                                               {0, -1, 0}, {1, -1, 0}, {-1, 0, 0}}};

}  // namespace

LabelField label_components_26(const VoxelGrid& grid) {
  const Dims d = grid.dims();
  LabelField result{Grid3<std::uint32_t>(d, grid.spacing()), 0};
  auto& labels = result.labels;
  UnionFind sets;
  sets.make();  // provisional id 0 is background

  for (std::int64_t z = 0; z < d.nz; ++z)
    for (std::int64_t y = 0; y < d.ny; ++y)
      for (std::int64_t x = 0; x < d.nx; ++x) {
        if (!grid(x, y, z)) continue;
        std::uint32_t current = 0;
        for (const auto& o : kBackward) {
          const std::int64_t nx = x + o.dx, ny = y + o.dy, nz = z + o.dz;
          if (!d.contains(nx, ny, nz)) continue;
          const std::uint32_t other = labels(nx, ny, nz);
          if (other == 0) continue;
          if (current == 0)
            current = other;
          else if (other != current)
            sets.unite(current, other);
        }
        labels(x, y, z) = current != 0 ? current : sets.make();
      }

  // Dense renumbering by first occurrence of each root.
  std::vector<std::uint32_t> dense(sets.size(), 0);
  std::uint32_t next = 0;
  for (auto& v : labels.data()) {
    if (v == 0) continue;
    const std::uint32_t root = sets.find(v);
    if (dense[root] == 0) dense[root] = ++next;
    v = dense[root];
  }
  result.count = next;
  return result;
}

VoxelGrid inlet_connected(const VoxelGrid& grid, const WindowSpec& w) {
  w.validate(grid.dims(), false);
  const LabelField field = label_components_26(grid);
  std::vector<std::uint8_t> keep(static_cast<std::size_t>(field.count) + 1, 0);
  const Dims d = grid.dims();
  for (std::int64_t y = 0; y < d.ny; ++y)
    for (std::int64_t x = 0; x < d.nx; ++x) keep[field.labels(x, y, w.inlet_z())] = 1;
  keep[0] = 0;
  VoxelGrid out(d, grid.spacing());
  auto src = field.labels.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = keep[src[i]];
  return out;
}

}  // namespace geotort
