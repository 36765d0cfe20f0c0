#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "geotort/grid.hpp"
#include "geotort/morph.hpp"

namespace geotort {

using Point = Eigen::Vector3d;
using Box = Eigen::AlignedBox3d;

/// splitmix64-derived seed for an independent substream.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream);

struct PointProcessSample {
  int phase = 1;
  double intensity = 0.0;
  Box box;
  std::vector<Point> points;
  std::uint64_t seed = 0;
};

/// Homogeneous Poisson process: Poisson(intensity * volume) points, i.i.d.
/// uniform in the box. Deterministic for a given seed within one build.
PointProcessSample sample_poisson(double intensity, const Box& box, std::uint64_t seed, int phase = 1);

struct GeometricGraph {
  std::vector<Point> vertices;
  /// Undirected edges (a, b) with a < b, sorted.
  std::vector<std::array<std::uint32_t, 2>> edges;
};

/// True if z lies in the closed lune of (a, b): max(|a-z|, |b-z|) <= |a-b|.
inline bool in_lune(const Point& a, const Point& b, const Point& z) {
  const double ab = (a - b).squaredNorm();
  return (a - z).squaredNorm() <= ab && (b - z).squaredNorm() <= ab;
}

/// Relative neighborhood graph: a and b are joined unless some third point
/// lies in their lune. Throws std::invalid_argument on duplicate points.
GeometricGraph build_rng_graph(std::span<const Point> points);

struct MollificationSpec {
  std::vector<GeometricGraph> graphs;  // one per phase, phase labels 1..k
  Dims dims{};
  double h = 1.0;
  Point origin = Point::Zero();  // physical position of voxel (0,0,0)
  double spacing = 0.5;          // edge sample spacing, at most h/2
  /// Extra voxels on every side over which skeletons are rasterized so that
  /// graph parts just outside the grid still compete for boundary voxels.
  std::int64_t pad_voxels = 0;
};

/// Squared voxel-unit distance from each grid voxel to the rasterized
/// skeleton of one phase (0-based index).
DistanceField skeleton_distance(const MollificationSpec& spec, std::size_t phase_index);

/// Each voxel gets the label of the phase whose skeleton is nearest; ties go to
/// the smallest label.
PhaseVolume voxelize_mollification(const MollificationSpec& spec);

/// Binary mask of one phase (label 1..k) with ties included: d_i <= min_j d_j.
VoxelGrid mollification_mask(const MollificationSpec& spec, std::uint8_t label);

/// Number of voxels along each axis for voxel centers at box.min() + i*h.
Dims grid_dims_for_box(const Box& box, double h);

struct GenerationConfig {
  std::vector<double> intensities;
  Box box;                        // region covered by the voxel grid
  double margin = 50.0;           // points are sampled in box enlarged by margin
  double h = 1.0;
  std::uint64_t seed = 0;
  double spacing = 0.0;           // 0 selects h/2
  std::int64_t pad_voxels = 24;   // clamped to the sampling margin
};

struct Microstructure {
  PhaseVolume volume;
  std::vector<GeometricGraph> graphs;
  Point origin = Point::Zero();
};

Microstructure generate_microstructure(const GenerationConfig& config);

/// Writes PREFIX_vertices.csv ("id,x,y,z") and PREFIX_edges.csv ("a,b").
void write_graph_csv(const GeometricGraph& graph, const std::filesystem::path& prefix);

}  // namespace geotort
