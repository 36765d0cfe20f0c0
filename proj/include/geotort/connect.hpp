#pragma once

#include <cstdint>

#include "geotort/grid.hpp"

namespace geotort {

/// Component ids per voxel: 0 on background, 1..count on the phase, numbered
/// in order of first occurrence in the x-fastest raster scan.
struct LabelField {
  Grid3<std::uint32_t> labels;
  std::uint32_t count = 0;
};

/// 26-connected component labeling (Hoshen-Kopelman raster scan with union-find).
LabelField label_components_26(const VoxelGrid& grid);

/// Union of the 26-components of grid that touch the inlet slice z = w.inlet_z().
/// The whole stored grid is searched, margins included.
VoxelGrid inlet_connected(const VoxelGrid& grid, const WindowSpec& w);

}  // namespace geotort
