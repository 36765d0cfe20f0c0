#include "geotort/constrict.hpp"

#include <cmath>
#include <ostream>

#include "geotort/connect.hpp"
#include "geotort/csv.hpp"

namespace geotort {

namespace {

template <typename Predicate>
std::int64_t largest_satisfying(const std::vector<std::int64_t>& candidates, Predicate&& holds) {
  // holds() is non-increasing along the ascending candidate list.
  if (candidates.empty() || !holds(candidates.front())) return -1;
  std::size_t lo = 0, hi = candidates.size();
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (holds(candidates[mid]))
      lo = mid;
    else
      hi = mid;
  }
  return candidates[lo];
}

}  // namespace

double volume_fraction(const VoxelGrid& grid, const WindowSpec& w) {
  w.validate(grid.dims(), false);
  return static_cast<double>(count_in_core(grid, w)) / static_cast<double>(w.core_voxels());
}

RadiusSearch::RadiusSearch(const VoxelGrid& grid, const WindowSpec& w)
    : RadiusSearch(std::make_shared<const DistanceField>(inner_distance_squared(grid)), grid, w) {}

RadiusSearch::RadiusSearch(std::shared_ptr<const DistanceField> inner, const VoxelGrid& grid, const WindowSpec& w)
    : inner_(std::move(inner)), h_(grid.spacing()), window_(w) {
  w.validate(grid.dims(), true);
  if (!inner_ || inner_->dims() != grid.dims()) throw std::invalid_argument("inner distance field does not match grid");
  candidates_ = candidate_squared_radii(*inner_);
  phase_volume_ = count_in_core(grid, w);
  const auto reach = static_cast<std::int64_t>(std::ceil(std::sqrt(static_cast<double>(candidates_.back()))));
  opening_block_ = w.core_block().grown(reach, grid.dims());
  intrusion_block_ = w.dilated_block().grown(reach, grid.dims());
  opening_inner_ = crop(*inner_, opening_block_);
  intrusion_inner_ = crop(*inner_, intrusion_block_);
}

double RadiusSearch::radius(std::int64_t squared) const {
  return std::sqrt(static_cast<double>(squared)) * h_;
}

std::int64_t RadiusSearch::opening_volume(std::int64_t squared_radius) const {
  return count_in_core(open_sq(opening_inner_, squared_radius), window_.relative_to(opening_block_.lo));
}

VoxelGrid RadiusSearch::intrusion_in_block(std::int64_t squared_radius) const {
  VoxelGrid centers = erode_sq(intrusion_inner_, squared_radius);
  // Centers outside the dilated window cannot carry an inlet connection.
  const VoxelBlock dilated = window_.dilated_block();
  const Dims d = centers.dims();
  const auto& o = intrusion_block_.lo;
  for (std::int64_t z = 0; z < d.nz; ++z)
    for (std::int64_t y = 0; y < d.ny; ++y)
      for (std::int64_t x = 0; x < d.nx; ++x)
        if (!dilated.contains(x + o[0], y + o[1], z + o[2])) centers(x, y, z) = 0;
  const VoxelGrid reached = inlet_connected(centers, window_.relative_to(o));
  return inscribed_ball_union(intrusion_inner_, reached);
}

VoxelGrid RadiusSearch::intrusion_mask(std::int64_t squared_radius) const {
  return embed(intrusion_in_block(squared_radius), intrusion_block_, inner_->dims());
}

std::int64_t RadiusSearch::intrusion_volume(std::int64_t squared_radius) const {
  return count_in_core(intrusion_in_block(squared_radius), window_.relative_to(intrusion_block_.lo));
}

std::int64_t RadiusSearch::largest_opening_radius() const {
  return largest_satisfying(candidates_, [this](std::int64_t t) { return opening_predicate(t); });
}

std::int64_t RadiusSearch::largest_intrusion_radius() const {
  return largest_satisfying(candidates_, [this](std::int64_t t) { return intrusion_predicate(t); });
}

double estimate_r_max(const VoxelGrid& grid, const WindowSpec& w) {
  const RadiusSearch search(grid, w);
  if (search.phase_volume() == 0) throw UndefinedEstimate("undefined r_max: phase is empty in the window");
  return search.radius(search.largest_opening_radius());
}

IntrusionSet compute_intrusion_set(const VoxelGrid& grid, const WindowSpec& w, double r) {
  const auto t = squared_radius_threshold(r, grid.spacing());
  const RadiusSearch search(grid, w);
  return {search.intrusion_mask(t), r};
}

double estimate_r_min(const VoxelGrid& grid, const WindowSpec& w) {
  const RadiusSearch search(grid, w);
  if (search.phase_volume() == 0) throw UndefinedEstimate("undefined r_min: phase is empty in the window");
  const auto t = search.largest_intrusion_radius();
  return t < 0 ? kNoRadius : search.radius(t);
}

ConstrictivityResult constrictivity(const RadiusSearch& search) {
  if (search.phase_volume() == 0) throw UndefinedEstimate("undefined constrictivity: phase is empty in the window");
  ConstrictivityResult result;
  result.window = search.window();
  result.p_hat = static_cast<double>(search.phase_volume()) / static_cast<double>(result.window.core_voxels());
  result.r_max = search.radius(search.largest_opening_radius());
  const auto t_min = search.largest_intrusion_radius();
  result.r_min = t_min < 0 ? kNoRadius : search.radius(t_min);
  if (t_min >= 0 && result.r_max > 0.0) {
    result.beta = std::pow(result.r_min / result.r_max, kConstrictivityExponent);
    result.beta_defined = true;
  }
  return result;
}

ConstrictivityResult constrictivity(const VoxelGrid& grid, const WindowSpec& w) {
  return constrictivity(RadiusSearch(grid, w));
}

RadiusProfile intrusion_volume_profile(const VoxelGrid& grid, const WindowSpec& w, const std::vector<double>& radii) {
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] >= 0.0)) throw std::invalid_argument("radii must be non-negative");
    if (i > 0 && !(radii[i] > radii[i - 1])) throw std::invalid_argument("radii must be strictly increasing");
  }
  const RadiusSearch search(grid, w);
  RadiusProfile profile;
  profile.window_voxels = w.core_voxels();
  for (double r : radii) {
    profile.radii.push_back(r);
    profile.volumes.push_back(search.intrusion_volume(squared_radius_threshold(r, grid.spacing())));
  }
  return profile;
}

void write_constrictivity_csv_header(std::ostream& out) { out << "N,alpha,p_hat,r_min,r_max,beta\n"; }

void write_constrictivity_csv_row(std::ostream& out, std::int64_t n, double alpha, const ConstrictivityResult& r) {
  out << n << ',' << format_number(alpha) << ',' << format_number(r.p_hat) << ',' << format_number(r.r_min) << ','
      << format_number(r.r_max) << ',' << format_number(r.beta) << '\n';
}

}  // namespace geotort
