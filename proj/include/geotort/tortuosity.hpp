#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>

#include "geotort/grid.hpp"

namespace geotort {

/// Physical shortest-path length from each voxel to the outlet slice through
/// the phase; +infinity where no path exists or outside the dilated window.
using PathLengthField = Grid3<double>;
inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

struct TortuosityResult {
  double tau_hat = kUnreachable;
  std::int64_t connected_inlet_count = 0;
  std::int64_t inlet_count = 0;
  double l = 0.0;
  std::int64_t margin_lateral = 0;
  std::int64_t margin_below = 0;
};

/// Multi-source Dijkstra seeded at every phase voxel of the outlet slice
/// (core lateral extent plus lateral margins). Paths use 26-neighbor steps of
/// length h, h*sqrt(2), h*sqrt(3) and stay inside the dilated window: lateral
/// margins on both sides, margin_below beneath the inlet, nothing above the
/// outlet. Ties in the queue are broken by linear index.
PathLengthField shortest_path_field(const VoxelGrid& grid, const WindowSpec& w);

/// Mean path length over the inlet voxels of the core window that reach the
/// outlet, divided by l = height_n * h. Infinite when no inlet voxel connects.
TortuosityResult tortuosity_estimate(const VoxelGrid& grid, const WindowSpec& w);

void write_tortuosity_csv_header(std::ostream& out);
/// "N,alpha,l,h,tau_hat,connected_inlets,total_inlets"
void write_tortuosity_csv_row(std::ostream& out, std::int64_t n, double alpha, double h,
                              const TortuosityResult& result);

}  // namespace geotort
