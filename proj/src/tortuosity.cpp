#include "geotort/tortuosity.hpp"

#include <cmath>
#include <functional>
#include <ostream>
#include <queue>
#include <vector>

#include "geotort/csv.hpp"

namespace geotort {

namespace {

struct QueueEntry {
  double dist;
  std::int64_t index;
  bool operator>(const QueueEntry& o) const { return dist > o.dist || (dist == o.dist && index > o.index); }
};

struct Neighbor {
  int dx, dy, dz;
  double length;  // in voxel units
};

std::vector<Neighbor> neighborhood_26() {
  std::vector<Neighbor> out;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int steps = std::abs(dx) + std::abs(dy) + std::abs(dz);
        if (steps == 0) continue;
        out.push_back({dx, dy, dz, std::sqrt(static_cast<double>(steps))});
      }
  return out;
}

}  // namespace

PathLengthField shortest_path_field(const VoxelGrid& grid, const WindowSpec& w) {
  w.validate(grid.dims(), true);
  const Dims d = grid.dims();
  const double h = grid.spacing();
  PathLengthField dist(d, h, kUnreachable);

  const std::int64_t x0 = w.ox - w.margin_lateral, x1 = w.ox + w.wx + w.margin_lateral;
  const std::int64_t y0 = w.oy - w.margin_lateral, y1 = w.oy + w.wy + w.margin_lateral;
  const std::int64_t z0 = w.oz - w.margin_below, z1 = w.outlet_z() + 1;
  auto admissible = [&](std::int64_t x, std::int64_t y, std::int64_t z) {
    return x >= x0 && x < x1 && y >= y0 && y < y1 && z >= z0 && z < z1 && grid(x, y, z) != 0;
  };

  std::vector<Neighbor> nbrs = neighborhood_26();
  for (auto& n : nbrs) n.length *= h;

  std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> queue;
  const std::int64_t zo = w.outlet_z();
  for (std::int64_t y = y0; y < y1; ++y)
    for (std::int64_t x = x0; x < x1; ++x)
      if (grid(x, y, zo)) {
        const std::int64_t i = d.index(x, y, zo);
        dist[i] = 0.0;
        queue.push({0.0, i});
      }

  while (!queue.empty()) {
    const QueueEntry top = queue.top();
    queue.pop();
    if (top.dist > dist[top.index]) continue;
    const auto [x, y, z] = d.decode(top.index);
    for (const auto& n : nbrs) {
      const std::int64_t nx = x + n.dx, ny = y + n.dy, nz = z + n.dz;
      if (!admissible(nx, ny, nz)) continue;
      const std::int64_t j = d.index(nx, ny, nz);
      const double candidate = top.dist + n.length;
      if (candidate < dist[j]) {
        dist[j] = candidate;
        queue.push({candidate, j});
      }
    }
  }
  return dist;
}

TortuosityResult tortuosity_estimate(const VoxelGrid& grid, const WindowSpec& w) {
  const PathLengthField field = shortest_path_field(grid, w);
  TortuosityResult result;
  result.l = static_cast<double>(w.height_n) * grid.spacing();
  result.margin_lateral = w.margin_lateral;
  result.margin_below = w.margin_below;
  double sum = 0.0;
  for (std::int64_t y = w.oy; y < w.oy + w.wy; ++y)
    for (std::int64_t x = w.ox; x < w.ox + w.wx; ++x) {
      if (!grid(x, y, w.inlet_z())) continue;
      ++result.inlet_count;
      const double v = field(x, y, w.inlet_z());
      if (v == kUnreachable) continue;
      ++result.connected_inlet_count;
      sum += v;
    }
  if (result.connected_inlet_count > 0)
    result.tau_hat = sum / static_cast<double>(result.connected_inlet_count) / result.l;
  return result;
}

void write_tortuosity_csv_header(std::ostream& out) {
  out << "N,alpha,l,h,tau_hat,connected_inlets,total_inlets\n";
}

void write_tortuosity_csv_row(std::ostream& out, std::int64_t n, double alpha, double h,
                              const TortuosityResult& result) {
  out << n << ',' << format_number(alpha) << ',' << format_number(result.l) << ',' << format_number(h) << ','
      << format_number(result.tau_hat) << ',' << result.connected_inlet_count << ',' << result.inlet_count << '\n';
}

}  // namespace geotort
