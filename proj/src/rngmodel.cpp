#include "geotort/rngmodel.hpp"

#include <algorithm>
#include <bitset>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>

#include "geotort/csv.hpp"

namespace geotort {

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

PointProcessSample sample_poisson(double intensity, const Box& box, std::uint64_t seed, int phase) {
  if (!(intensity > 0.0) || !std::isfinite(intensity)) throw std::invalid_argument("intensity must be positive");
  const Point extent = box.max() - box.min();
  if (box.isEmpty() || !(extent.minCoeff() > 0.0)) throw std::invalid_argument("sampling box is degenerate");

  PointProcessSample sample{phase, intensity, box, {}, seed};
  std::mt19937_64 engine(seed);
  std::poisson_distribution<std::int64_t> count(intensity * extent.prod());
  const std::int64_t n = count(engine);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  sample.points.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    Point p;
    for (int a = 0; a < 3; ++a) p[a] = box.min()[a] + unit(engine) * extent[a];
    sample.points.push_back(p);
  }
  return sample;
}

// Relative neighborhood graph ----------------------------------------------

namespace {

constexpr std::size_t kDirections = 256;

// A point z at distance s from x blocks every y with |x-y| >= s whose
// direction is within 60 degrees of z's. Sample directions are covered by
// narrower cones to absorb the ~9.7 degree covering radius of the set.
const std::array<Point, kDirections>& sphere_directions() {
  static const auto dirs = [] {
    std::array<Point, kDirections> out;
    const double golden = std::numbers::pi * (1.0 + std::sqrt(5.0));
    for (std::size_t i = 0; i < kDirections; ++i) {
      const double t = (static_cast<double>(i) + 0.5) / kDirections;
      const double polar = std::acos(1.0 - 2.0 * t);
      const double azimuth = golden * (static_cast<double>(i) + 0.5);
      out[i] = Point(std::cos(azimuth) * std::sin(polar), std::sin(azimuth) * std::sin(polar), std::cos(polar));
    }
    return out;
  }();
  return dirs;
}
const double kConeCos = std::cos(48.0 * std::numbers::pi / 180.0);

class SpatialHash {
 public:
  explicit SpatialHash(std::span<const Point> points) : points_(points) {
    lo_ = points[0];
    Point hi = points[0];
    for (const auto& p : points) {
      lo_ = lo_.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    const Point extent = (hi - lo_).cwiseMax(1e-12);
    // About one point per cell.
    const double volume = extent.prod();
    cell_ = std::cbrt(volume / static_cast<double>(points.size()));
    if (!(cell_ > 0.0) || !std::isfinite(cell_)) cell_ = extent.maxCoeff();
    for (int a = 0; a < 3; ++a) {
      const double cells = std::floor(extent[a] / cell_) + 1.0;
      size_[a] = static_cast<std::int64_t>(std::min(cells, 1024.0));
    }
    // Axes capped at 1024 cells need a larger cell size to stay consistent.
    for (int a = 0; a < 3; ++a) cell_ = std::max(cell_, extent[a] / static_cast<double>(size_[a]) * (1 + 1e-12));

    start_.assign(static_cast<std::size_t>(size_[0] * size_[1] * size_[2]) + 1, 0);
    std::vector<std::int64_t> cell_of(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      cell_of[i] = flat(cell_coords(points[i]));
      ++start_[cell_of[i] + 1];
    }
    for (std::size_t c = 1; c < start_.size(); ++c) start_[c] += start_[c - 1];
    members_.resize(points.size());
    std::vector<std::uint32_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < points.size(); ++i) members_[fill[cell_of[i]]++] = static_cast<std::uint32_t>(i);
  }

  double cell_size() const { return cell_; }
  const std::array<std::int64_t, 3>& size() const { return size_; }

  std::array<std::int64_t, 3> cell_coords(const Point& p) const {
    std::array<std::int64_t, 3> c;
    for (int a = 0; a < 3; ++a)
      c[a] = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor((p[a] - lo_[a]) / cell_)), 0,
                                      size_[a] - 1);
    return c;
  }

  /// Calls f(index) for every point in cells at Chebyshev distance exactly k.
  template <typename F>
  void for_ring(const std::array<std::int64_t, 3>& c, std::int64_t k, F&& f) const {
    for (std::int64_t z = c[2] - k; z <= c[2] + k; ++z) {
      if (z < 0 || z >= size_[2]) continue;
      for (std::int64_t y = c[1] - k; y <= c[1] + k; ++y) {
        if (y < 0 || y >= size_[1]) continue;
        const bool face = std::abs(z - c[2]) == k || std::abs(y - c[1]) == k;
        const std::int64_t step = face || k == 0 ? 1 : 2 * k;
        for (std::int64_t x = c[0] - k; x <= c[0] + k; x += step) {
          if (x < 0 || x >= size_[0]) continue;
          const std::int64_t cell = flat({x, y, z});
          for (std::uint32_t m = start_[cell]; m < start_[cell + 1]; ++m) f(members_[m]);
        }
      }
    }
  }

  std::int64_t max_ring(const std::array<std::int64_t, 3>& c) const {
    std::int64_t r = 0;
    for (int a = 0; a < 3; ++a) r = std::max({r, c[a], size_[a] - 1 - c[a]});
    return r;
  }

 private:
  std::int64_t flat(const std::array<std::int64_t, 3>& c) const { return c[0] + size_[0] * (c[1] + size_[1] * c[2]); }

  std::span<const Point> points_;
  Point lo_;
  double cell_ = 1.0;
  std::array<std::int64_t, 3> size_{1, 1, 1};
  std::vector<std::uint32_t> start_;
  std::vector<std::uint32_t> members_;
};

void reject_duplicates(std::span<const Point> points) {
  std::vector<std::uint32_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::uint32_t>(i);
  auto less = [&](std::uint32_t a, std::uint32_t b) {
    return std::lexicographical_compare(points[a].data(), points[a].data() + 3, points[b].data(), points[b].data() + 3);
  };
  std::sort(order.begin(), order.end(), less);
  for (std::size_t i = 1; i < order.size(); ++i)
    if (points[order[i]] == points[order[i - 1]]) throw std::invalid_argument("duplicate points in RNG input");
}

}  // namespace

GeometricGraph build_rng_graph(std::span<const Point> points) {
  GeometricGraph graph;
  graph.vertices.assign(points.begin(), points.end());
  if (points.size() < 2) return graph;
  reject_duplicates(points);

  const SpatialHash hash(points);
  const auto& dirs = sphere_directions();

  struct Near {
    double d2;
    std::uint32_t index;
    bool operator<(const Near& o) const { return d2 < o.d2 || (d2 == o.d2 && index < o.index); }
  };
  std::vector<Near> near;

  for (std::uint32_t i = 0; i < points.size(); ++i) {
    const Point& x = points[i];
    const auto cell = hash.cell_coords(x);
    const std::int64_t last_ring = hash.max_ring(cell);
    near.clear();
    std::size_t processed = 0;
    std::bitset<kDirections> covered;

    for (std::int64_t k = 0; k <= last_ring; ++k) {
      const std::size_t before = near.size();
      hash.for_ring(cell, k, [&](std::uint32_t j) {
        if (j != i) near.push_back({(points[j] - x).squaredNorm(), j});
      });
      std::sort(near.begin() + static_cast<std::ptrdiff_t>(before), near.end());
      std::inplace_merge(near.begin() + static_cast<std::ptrdiff_t>(processed),
                         near.begin() + static_cast<std::ptrdiff_t>(before), near.end());

      // Every point within this radius of x has been collected.
      const double reach = static_cast<double>(k) * hash.cell_size();
      const bool complete = k == last_ring;
      while (processed < near.size() && (complete || near[processed].d2 <= reach * reach)) {
        const Near cand = near[processed];
        const Point& y = points[cand.index];
        bool blocked = false;
        for (std::size_t m = 0; m < near.size() && near[m].d2 <= cand.d2; ++m) {
          if (m == processed) continue;
          if ((points[near[m].index] - y).squaredNorm() <= cand.d2) {
            blocked = true;
            break;
          }
        }
        if (!blocked && i < cand.index) graph.edges.push_back({i, cand.index});
        if (!covered.all()) {
          const Point u = (y - x) / std::sqrt(cand.d2);
          for (std::size_t s = 0; s < kDirections; ++s)
            if (!covered[s] && dirs[s].dot(u) >= kConeCos) covered.set(s);
        }
        ++processed;
      }
      if (covered.all()) break;
    }
  }
  std::sort(graph.edges.begin(), graph.edges.end());
  return graph;
}

// Mollification ----------------------------------------------------------------

namespace {

void check_spec(const MollificationSpec& spec) {
  if (spec.graphs.empty()) throw std::invalid_argument("mollification needs at least one phase");
  if (spec.graphs.size() > 255) throw std::invalid_argument("at most 255 phases are supported");
  if (!(spec.h > 0.0)) throw std::invalid_argument("voxel spacing must be positive");
  if (!(spec.spacing > 0.0) || spec.spacing > spec.h / 2 * (1 + 1e-12))
    throw std::invalid_argument("edge sample spacing must lie in (0, h/2]");
  if (spec.pad_voxels < 0) throw std::invalid_argument("padding must be non-negative");
  for (const auto& g : spec.graphs)
    if (g.vertices.empty()) throw std::invalid_argument("every phase graph needs at least one vertex");
}

VoxelGrid rasterize(const MollificationSpec& spec, const GeometricGraph& graph) {
  const std::int64_t pad = spec.pad_voxels;
  const Dims padded{spec.dims.nx + 2 * pad, spec.dims.ny + 2 * pad, spec.dims.nz + 2 * pad};
  VoxelGrid seeds(padded, spec.h);
  const Point origin = spec.origin - Point::Constant(static_cast<double>(pad) * spec.h);
  auto mark = [&](const Point& p) {
    const Point v = (p - origin) / spec.h;
    const std::int64_t x = std::llround(v.x()), y = std::llround(v.y()), z = std::llround(v.z());
    if (padded.contains(x, y, z)) seeds(x, y, z) = 1;
  };
  for (const auto& p : graph.vertices) mark(p);
  for (const auto& [a, b] : graph.edges) {
    const Point& pa = graph.vertices[a];
    const Point& pb = graph.vertices[b];
    const double length = (pb - pa).norm();
    const auto steps = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(length / spec.spacing)));
    for (std::int64_t s = 0; s <= steps; ++s)
      mark(pa + (pb - pa) * (static_cast<double>(s) / static_cast<double>(steps)));
  }
  return seeds;
}

}  // namespace

DistanceField skeleton_distance(const MollificationSpec& spec, std::size_t phase_index) {
  check_spec(spec);
  const DistanceField padded = edt_squared(rasterize(spec, spec.graphs.at(phase_index)), Seeds::foreground);
  if (spec.pad_voxels == 0) return padded;
  DistanceField out(spec.dims, spec.h);
  const std::int64_t p = spec.pad_voxels;
  for (std::int64_t z = 0; z < spec.dims.nz; ++z)
    for (std::int64_t y = 0; y < spec.dims.ny; ++y) {
      const std::uint32_t* src = &padded(p, y + p, z + p);
      std::copy(src, src + spec.dims.nx, &out(0, y, z));
    }
  return out;
}

PhaseVolume voxelize_mollification(const MollificationSpec& spec) {
  check_spec(spec);
  PhaseVolume volume{Grid3<std::uint8_t>(spec.dims, spec.h, 1), static_cast<std::uint8_t>(spec.graphs.size())};
  DistanceField best = skeleton_distance(spec, 0);
  for (std::size_t i = 1; i < spec.graphs.size(); ++i) {
    const DistanceField d = skeleton_distance(spec, i);
    auto cur = d.data();
    auto b = best.data();
    auto lab = volume.labels.data();
    for (std::size_t v = 0; v < cur.size(); ++v)
      if (cur[v] < b[v]) {
        b[v] = cur[v];
        lab[v] = static_cast<std::uint8_t>(i + 1);
      }
  }
  return volume;
}

VoxelGrid mollification_mask(const MollificationSpec& spec, std::uint8_t label) {
  check_spec(spec);
  if (label < 1 || label > spec.graphs.size()) throw std::invalid_argument("phase label out of range");
  const DistanceField mine = skeleton_distance(spec, label - 1u);
  VoxelGrid mask(spec.dims, spec.h, 1);
  for (std::size_t i = 0; i < spec.graphs.size(); ++i) {
    if (i == label - 1u) continue;
    const DistanceField other = skeleton_distance(spec, i);
    auto o = other.data();
    auto m = mine.data();
    auto out = mask.data();
    for (std::size_t v = 0; v < o.size(); ++v)
      if (o[v] < m[v]) out[v] = 0;
  }
  return mask;
}

Dims grid_dims_for_box(const Box& box, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("voxel spacing must be positive");
  const Point extent = box.max() - box.min();
  if (box.isEmpty() || !(extent.minCoeff() >= 0.0)) throw std::invalid_argument("box is empty");
  auto count = [&](double e) { return static_cast<std::int64_t>(std::floor(e / h + 1e-9)) + 1; };
  return {count(extent.x()), count(extent.y()), count(extent.z())};
}

Microstructure generate_microstructure(const GenerationConfig& config) {
  if (config.intensities.empty()) throw std::invalid_argument("at least one intensity is required");
  if (!(config.margin >= 0.0)) throw std::invalid_argument("sampling margin must be non-negative");
  Box sampling = config.box;
  sampling.min().array() -= config.margin;
  sampling.max().array() += config.margin;

  Microstructure result;
  result.origin = config.box.min();
  MollificationSpec spec;
  spec.dims = grid_dims_for_box(config.box, config.h);
  spec.h = config.h;
  spec.origin = config.box.min();
  spec.spacing = config.spacing > 0.0 ? config.spacing : config.h / 2;
  spec.pad_voxels = std::min<std::int64_t>(config.pad_voxels,
                                           static_cast<std::int64_t>(std::ceil(config.margin / config.h)));
  for (std::size_t i = 0; i < config.intensities.size(); ++i) {
    const auto sample = sample_poisson(config.intensities[i], sampling, split_seed(config.seed, i),
                                       static_cast<int>(i + 1));
    spec.graphs.push_back(build_rng_graph(sample.points));
  }
  result.volume = voxelize_mollification(spec);
  result.graphs = std::move(spec.graphs);
  return result;
}

void write_graph_csv(const GeometricGraph& graph, const std::filesystem::path& prefix) {
  std::ofstream vertices(prefix.string() + "_vertices.csv");
  std::ofstream edges(prefix.string() + "_edges.csv");
  if (!vertices || !edges) throw std::runtime_error("cannot write graph files with prefix " + prefix.string());
  vertices << "id,x,y,z\n";
  for (std::size_t i = 0; i < graph.vertices.size(); ++i) {
    const auto& p = graph.vertices[i];
    vertices << i << ',' << format_number(p.x()) << ',' << format_number(p.y()) << ',' << format_number(p.z())
             << '\n';
  }
  edges << "a,b\n";
  for (const auto& [a, b] : graph.edges) edges << a << ',' << b << '\n';
}

}  // namespace geotort
