#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <stdexcept>
#include <vector>

#include "geotort/grid.hpp"
#include "geotort/morph.hpp"

namespace geotort {

/// Raised when an estimator has no meaning for the input (empty phase).
class UndefinedEstimate : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline constexpr double kNoRadius = -std::numeric_limits<double>::infinity();

/// Dimension d-1 used as the constrictivity exponent in 3D.
inline constexpr int kConstrictivityExponent = 2;

struct IntrusionSet {
  VoxelGrid mask;
  double r = 0.0;
};

struct ConstrictivityResult {
  double p_hat = 0.0;
  double r_min = kNoRadius;
  double r_max = kNoRadius;
  double beta = 0.0;
  /// False when beta is a sentinel (r_min = -inf or r_max = 0).
  bool beta_defined = false;
  int dimension_exponent = kConstrictivityExponent;
  WindowSpec window{};
};

double volume_fraction(const VoxelGrid& grid, const WindowSpec& w);

/// Shared state for the r_max / r_min searches over one grid and window.
/// Distances come from the whole stored grid, so erosion near the window
/// faces sees the phase beyond them. Inlet connections of eroded centers are
/// confined to the window plus its margins; volumes are counted in the core
/// window. Candidate squared radii are 0 and every inner distance realized
/// anywhere in the grid.
class RadiusSearch {
 public:
  RadiusSearch(const VoxelGrid& grid, const WindowSpec& w);
  /// Reuses the inner distance field of the whole grid across windows.
  RadiusSearch(std::shared_ptr<const DistanceField> inner, const VoxelGrid& grid, const WindowSpec& w);

  const std::vector<std::int64_t>& candidates() const { return candidates_; }
  std::int64_t phase_volume() const { return phase_volume_; }
  const WindowSpec& window() const { return window_; }
  double radius(std::int64_t squared) const;

  std::int64_t opening_volume(std::int64_t squared_radius) const;
  std::int64_t intrusion_volume(std::int64_t squared_radius) const;
  /// Intrusion set over the whole stored grid.
  VoxelGrid intrusion_mask(std::int64_t squared_radius) const;

  bool opening_predicate(std::int64_t squared_radius) const {
    return 2 * opening_volume(squared_radius) >= phase_volume_;
  }
  bool intrusion_predicate(std::int64_t squared_radius) const {
    return 2 * intrusion_volume(squared_radius) >= phase_volume_;
  }

  /// Largest candidate squared radius satisfying each predicate; -1 if none.
  std::int64_t largest_opening_radius() const;
  std::int64_t largest_intrusion_radius() const;

 private:
  VoxelGrid intrusion_in_block(std::int64_t squared_radius) const;

  std::shared_ptr<const DistanceField> inner_;
  double h_ = 1.0;
  WindowSpec window_;
  std::vector<std::int64_t> candidates_;
  std::int64_t phase_volume_ = 0;
  // Blocks reaching one largest-ball radius beyond the core window and the
  // dilated window; nothing outside them can cover a core voxel.
  VoxelBlock opening_block_, intrusion_block_;
  DistanceField opening_inner_, intrusion_inner_;
};

double estimate_r_max(const VoxelGrid& grid, const WindowSpec& w);

/// Balls of radius r entering from the inlet slice: the inlet-connected part of
/// the eroded phase, swept by the largest inscribed ball around each center.
IntrusionSet compute_intrusion_set(const VoxelGrid& grid, const WindowSpec& w, double r);

/// kNoRadius when even r = 0 leaves less than half the phase volume reachable.
double estimate_r_min(const VoxelGrid& grid, const WindowSpec& w);

ConstrictivityResult constrictivity(const VoxelGrid& grid, const WindowSpec& w);
ConstrictivityResult constrictivity(const RadiusSearch& search);

/// Intrusion-set volume inside the core window for each radius (ascending).
RadiusProfile intrusion_volume_profile(const VoxelGrid& grid, const WindowSpec& w, const std::vector<double>& radii);

void write_constrictivity_csv_header(std::ostream& out);
/// "N,alpha,p_hat,r_min,r_max,beta"
void write_constrictivity_csv_row(std::ostream& out, std::int64_t n, double alpha, const ConstrictivityResult& r);

}  // namespace geotort
