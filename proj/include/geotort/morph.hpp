#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

#include "geotort/grid.hpp"

namespace geotort {

/// Squared Euclidean distances in voxel units. Exact, since voxel centers lie on Z^3.
using DistanceField = Grid3<std::uint32_t>;
inline constexpr std::uint32_t kNoSeed = std::numeric_limits<std::uint32_t>::max();

enum class Seeds { foreground, background };

/// Squared distance from every voxel to the nearest seed voxel center.
/// Voxels are kNoSeed when the grid holds no seed at all.
DistanceField edt_squared(const VoxelGrid& grid, Seeds seeds);

/// Squared distance from each voxel to the nearest background voxel, where
/// every voxel outside the grid counts as background. Zero on background.
DistanceField inner_distance_squared(const VoxelGrid& grid);

/// floor((r/h)^2) with r = sqrt(m)*h snapping to m. Throws on negative r.
std::int64_t squared_radius_threshold(double r, double h);

VoxelGrid erode(const VoxelGrid& grid, double r);
VoxelGrid dilate(const VoxelGrid& grid, double r);

/// Opening: union of all digital balls of squared radius >= (r/h)^2 that fit
/// inside the phase. Contains dilate(erode(grid, r), r), is contained in the
/// phase and shrinks monotonically as r grows.
VoxelGrid open(const VoxelGrid& grid, double r);

// Squared-radius forms over a precomputed inner distance; threshold in voxel^2.
VoxelGrid erode_sq(const DistanceField& inner, std::int64_t threshold);
VoxelGrid dilate_sq(const VoxelGrid& grid, std::int64_t threshold);
VoxelGrid open_sq(const DistanceField& inner, std::int64_t threshold);

/// Union over the marked centers c of the balls {y : |y - c|^2 < inner(c)}.
VoxelGrid inscribed_ball_union(const DistanceField& inner, const VoxelGrid& centers);

/// Distinct nonzero values of the inner distance plus 0, ascending. Eroded sets
/// and openings are constant for thresholds between consecutive entries.
std::vector<std::int64_t> candidate_squared_radii(const DistanceField& inner);

struct RadiusProfile {
  std::vector<double> radii;
  std::vector<std::int64_t> volumes;
  std::int64_t window_voxels = 0;
};

/// Opening volume inside the core window for each radius (ascending).
RadiusProfile opening_volume_profile(const VoxelGrid& grid, const WindowSpec& w, const std::vector<double>& radii);

std::int64_t count_in_core(const VoxelGrid& grid, const WindowSpec& w);

void write_profile_csv(std::ostream& out, const RadiusProfile& profile);

}  // namespace geotort
