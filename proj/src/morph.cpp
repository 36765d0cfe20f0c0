#include "geotort/morph.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "geotort/csv.hpp"

namespace geotort {

namespace {

constexpr std::int64_t kBatch = 16;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  const std::int64_t q = a / b;
  return (a % b != 0 && (a < 0) != (b < 0)) ? q - 1 : q;
}

// out[u] = min_i (u - i)^2 + f[i] over the entries with f[i] != inf.
// Lower envelope of parabolas with integer breakpoints (Meijster et al.), exact.
template <typename T>
void envelope_line(const T* f, std::ptrdiff_t stride, std::int64_t n, T* out, std::ptrdiff_t out_stride,
                   std::int64_t* centers, std::int64_t* starts, T inf) {
  auto g = [&](std::int64_t x, std::int64_t i) {
    return (x - i) * (x - i) + static_cast<std::int64_t>(f[i * stride]);
  };
  std::int64_t k = -1;
  for (std::int64_t q = 0; q < n; ++q) {
    if (f[q * stride] == inf) continue;
    while (k >= 0 && g(starts[k], centers[k]) > g(starts[k], q)) --k;
    if (k < 0) {
      k = 0;
      centers[0] = q;
      starts[0] = 0;
    } else {
      const std::int64_t i = centers[k];
      const std::int64_t num = q * q - i * i + static_cast<std::int64_t>(f[q * stride]) -
                               static_cast<std::int64_t>(f[i * stride]);
      const std::int64_t w = 1 + floor_div(num, 2 * (q - i));
      if (w < n) {
        ++k;
        centers[k] = q;
        starts[k] = std::max<std::int64_t>(w, 0);
      }
    }
  }
  if (k < 0) {
    for (std::int64_t u = 0; u < n; ++u) out[u * out_stride] = inf;
    return;
  }
  for (std::int64_t u = n - 1; u >= 0; --u) {
    out[u * out_stride] = static_cast<T>(g(u, centers[k]));
    if (u == starts[k]) --k;
  }
}

// In-place separable transform result(y) = min_c |y - c|^2 + f(c).
template <typename T>
void envelope_3d(Grid3<T>& field, T inf) {
  const Dims d = field.dims();
  const std::int64_t longest = std::max({d.nx, d.ny, d.nz});
  std::vector<std::int64_t> centers(longest), starts(longest);
  std::vector<T> line(longest);
  T* data = field.data().data();

  for (std::int64_t z = 0; z < d.nz; ++z)
    for (std::int64_t y = 0; y < d.ny; ++y) {
      T* row = data + d.index(0, y, z);
      std::copy(row, row + d.nx, line.begin());
      envelope_line(line.data(), 1, d.nx, row, 1, centers.data(), starts.data(), inf);
    }

  // The y and z passes gather kBatch adjacent x columns at a time so that
  // strided reads touch whole cache lines.
  std::vector<T> in_buf(longest * kBatch), out_buf(longest * kBatch);
  auto strided_pass = [&](std::int64_t n, std::int64_t stride, std::int64_t outer_count, std::int64_t outer_stride) {
    for (std::int64_t o = 0; o < outer_count; ++o)
      for (std::int64_t x0 = 0; x0 < d.nx; x0 += kBatch) {
        const std::int64_t b_count = std::min(kBatch, d.nx - x0);
        T* base = data + o * outer_stride + x0;
        for (std::int64_t j = 0; j < n; ++j)
          for (std::int64_t b = 0; b < b_count; ++b) in_buf[j * kBatch + b] = base[j * stride + b];
        for (std::int64_t b = 0; b < b_count; ++b)
          envelope_line(in_buf.data() + b, kBatch, n, out_buf.data() + b, kBatch, centers.data(), starts.data(),
                        inf);
        for (std::int64_t j = 0; j < n; ++j)
          for (std::int64_t b = 0; b < b_count; ++b) base[j * stride + b] = out_buf[j * kBatch + b];
      }
  };
  if (d.ny > 1) strided_pass(d.ny, d.nx, d.nz, d.nx * d.ny);
  if (d.nz > 1) strided_pass(d.nz, d.nx * d.ny, d.ny, d.nx);
}

void check_distance_range(const Dims& d) {
  const double worst = static_cast<double>(d.nx) * d.nx + static_cast<double>(d.ny) * d.ny +
                       static_cast<double>(d.nz) * d.nz;
  if (worst >= static_cast<double>(kNoSeed)) throw std::invalid_argument("grid too large for 32-bit distances");
}

}  // namespace

DistanceField edt_squared(const VoxelGrid& grid, Seeds seeds) {
  check_distance_range(grid.dims());
  DistanceField field(grid.dims(), grid.spacing());
  const std::uint8_t seed_value = seeds == Seeds::foreground ? 1 : 0;
  auto src = grid.data();
  auto dst = field.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = (src[i] != 0) == (seed_value != 0) ? 0u : kNoSeed;
  envelope_3d(field, kNoSeed);
  return field;
}

DistanceField inner_distance_squared(const VoxelGrid& grid) {
  DistanceField field = edt_squared(grid, Seeds::background);
  const Dims d = grid.dims();
  for (std::int64_t z = 0; z < d.nz; ++z) {
    const std::int64_t bz = std::min(z + 1, d.nz - z);
    for (std::int64_t y = 0; y < d.ny; ++y) {
      const std::int64_t byz = std::min({bz, y + 1, d.ny - y});
      for (std::int64_t x = 0; x < d.nx; ++x) {
        auto& v = field(x, y, z);
        if (v == 0) continue;
        // The nearest out-of-grid voxel is always reached along a single axis.
        const std::int64_t b = std::min({byz, x + 1, d.nx - x});
        v = std::min<std::uint32_t>(v, static_cast<std::uint32_t>(b * b));
      }
    }
  }
  return field;
}

std::int64_t squared_radius_threshold(double r, double h) {
  if (!(r >= 0.0)) throw std::invalid_argument("radius must be non-negative");
  if (std::isinf(r)) return std::numeric_limits<std::int64_t>::max();
  const double q = (r / h) * (r / h);
  const double nearest = std::round(q);
  if (std::abs(q - nearest) <= 1e-9 * std::max(1.0, q)) return static_cast<std::int64_t>(nearest);
  return static_cast<std::int64_t>(std::floor(q));
}

VoxelGrid erode_sq(const DistanceField& inner, std::int64_t threshold) {
  VoxelGrid out(inner.dims(), inner.spacing());
  auto src = inner.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<std::int64_t>(src[i]) > threshold ? 1 : 0;
  return out;
}

VoxelGrid dilate_sq(const VoxelGrid& grid, std::int64_t threshold) {
  const DistanceField dist = edt_squared(grid, Seeds::foreground);
  VoxelGrid out(grid.dims(), grid.spacing());
  auto src = dist.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i)
    dst[i] = src[i] != kNoSeed && static_cast<std::int64_t>(src[i]) <= threshold ? 1 : 0;
  return out;
}

VoxelGrid inscribed_ball_union(const DistanceField& inner, const VoxelGrid& centers) {
  constexpr std::int64_t inf = std::numeric_limits<std::int64_t>::max();
  Grid3<std::int64_t> field(inner.dims(), inner.spacing(), inf);
  auto c = centers.data();
  auto d = inner.data();
  auto f = field.data();
  for (std::size_t i = 0; i < f.size(); ++i)
    if (c[i] && d[i] > 0) f[i] = -static_cast<std::int64_t>(d[i]);
  envelope_3d(field, inf);
  VoxelGrid out(inner.dims(), inner.spacing());
  auto dst = out.data();
  for (std::size_t i = 0; i < f.size(); ++i) dst[i] = f[i] < 0 ? 1 : 0;
  return out;
}

VoxelGrid open_sq(const DistanceField& inner, std::int64_t threshold) {
  return inscribed_ball_union(inner, erode_sq(inner, threshold));
}

VoxelGrid erode(const VoxelGrid& grid, double r) {
  const auto t = squared_radius_threshold(r, grid.spacing());
  return erode_sq(inner_distance_squared(grid), t);
}

VoxelGrid dilate(const VoxelGrid& grid, double r) {
  const auto t = squared_radius_threshold(r, grid.spacing());
  return dilate_sq(grid, t);
}

VoxelGrid open(const VoxelGrid& grid, double r) {
  const auto t = squared_radius_threshold(r, grid.spacing());
  return open_sq(inner_distance_squared(grid), t);
}

std::vector<std::int64_t> candidate_squared_radii(const DistanceField& inner) {
  auto d = inner.data();
  std::uint32_t largest = 0;
  for (auto v : d) largest = std::max(largest, v);
  std::vector<bool> present(static_cast<std::size_t>(largest) + 1, false);
  for (auto v : d) present[v] = true;
  std::vector<std::int64_t> out{0};
  for (std::size_t m = 1; m < present.size(); ++m)
    if (present[m]) out.push_back(static_cast<std::int64_t>(m));
  return out;
}

std::int64_t count_in_core(const VoxelGrid& grid, const WindowSpec& w) {
  std::int64_t count = 0;
  for (std::int64_t z = w.oz; z <= w.outlet_z(); ++z)
    for (std::int64_t y = w.oy; y < w.oy + w.wy; ++y) {
      const std::uint8_t* row = &grid(w.ox, y, z);
      for (std::int64_t x = 0; x < w.wx; ++x) count += row[x] != 0;
    }
  return count;
}

RadiusProfile opening_volume_profile(const VoxelGrid& grid, const WindowSpec& w, const std::vector<double>& radii) {
  w.validate(grid.dims(), false);
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] >= 0.0)) throw std::invalid_argument("radii must be non-negative");
    if (i > 0 && !(radii[i] > radii[i - 1])) throw std::invalid_argument("radii must be strictly increasing");
  }
  const DistanceField inner = inner_distance_squared(grid);
  RadiusProfile profile;
  profile.window_voxels = w.core_voxels();
  for (double r : radii) {
    profile.radii.push_back(r);
    profile.volumes.push_back(count_in_core(open_sq(inner, squared_radius_threshold(r, grid.spacing())), w));
  }
  return profile;
}

void write_profile_csv(std::ostream& out, const RadiusProfile& profile) {
  out << "r,volume_voxels,volume_fraction\n";
  for (std::size_t i = 0; i < profile.radii.size(); ++i) {
    out << format_number(profile.radii[i]) << ',' << profile.volumes[i] << ','
        << format_number(static_cast<double>(profile.volumes[i]) / static_cast<double>(profile.window_voxels))
        << '\n';
  }
}

}  // namespace geotort
