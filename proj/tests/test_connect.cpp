#include <doctest.h>

#include "geotort/connect.hpp"
#include "test_support.hpp"

using namespace geotort;
namespace gt = geotort::testing;

TEST_CASE("labeling small cases") {
  CHECK(label_components_26(VoxelGrid({3, 3, 3}, 1.0)).count == 0);

  VoxelGrid corner({2, 2, 2}, 1.0);
  corner(0, 0, 0) = corner(1, 1, 1) = 1;
  const auto l = label_components_26(corner);
  CHECK(l.count == 1);
  CHECK(l.labels(1, 1, 1) == 1);

  VoxelGrid apart({3, 1, 1}, 1.0);
  apart(0, 0, 0) = apart(2, 0, 0) = 1;
  const auto a = label_components_26(apart);
  CHECK(a.count == 2);
  CHECK(a.labels(0, 0, 0) == 1);
  CHECK(a.labels(2, 0, 0) == 2);
  CHECK(a.labels(1, 0, 0) == 0);
}

TEST_CASE("labeling equals BFS flood fill") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const double p = 0.1 + 0.02 * static_cast<double>(s);  // spans the percolation range
    const auto g = gt::random_grid({16, 16, 16}, p, 500 + s);
    const auto fast = label_components_26(g);
    const auto slow = gt::bfs_labels(g);
    CHECK(std::equal(slow.begin(), slow.end(), fast.labels.data().begin()));
    CHECK(fast.count == *std::max_element(slow.begin(), slow.end()));
  }
}

TEST_CASE("U-shaped component merges late in the scan") {
  VoxelGrid g({5, 1, 5}, 1.0);
  for (std::int64_t z = 0; z < 5; ++z) g(0, 0, z) = g(4, 0, z) = 1;
  for (std::int64_t x = 0; x < 5; ++x) g(x, 0, 4) = 1;
  CHECK(label_components_26(g).count == 1);
}

TEST_CASE("inlet connectivity") {
  WindowSpec w = gt::full_window({6, 6, 8});
  SUBCASE("nothing on the inlet slice") {
    VoxelGrid g({6, 6, 8}, 1.0, 1);
    for (std::int64_t y = 0; y < 6; ++y)
      for (std::int64_t x = 0; x < 6; ++x) g(x, y, 0) = 0;
    CHECK(count_foreground(inlet_connected(g, w)) == 0);
  }
  SUBCASE("column through z is returned unchanged") {
    VoxelGrid g({6, 6, 8}, 1.0);
    for (std::int64_t z = 0; z < 8; ++z) g(2, 3, z) = 1;
    g(5, 5, 5) = 1;  // isolated voxel away from the inlet
    VoxelGrid column = g;
    column(5, 5, 5) = 0;
    CHECK(inlet_connected(g, w) == column);
  }
  SUBCASE("components reaching the inlet through the margin below count") {
    VoxelGrid g({6, 6, 8}, 1.0);
    for (std::int64_t z = 0; z < 8; ++z) g(1, 1, z) = 1;
    for (std::int64_t z = 0; z < 3; ++z) g(4, 4, z) = 1;  // ends below the inlet
    w.oz = 3;
    w.height_n = 4;
    w.margin_below = 3;
    const auto r = inlet_connected(g, w);
    CHECK(r(1, 1, 0) == 1);
    CHECK(r(4, 4, 0) == 0);
  }
  SUBCASE("random grids equal multi-source BFS") {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const auto g = gt::random_grid({6, 6, 8}, 0.15 + 0.02 * static_cast<double>(s), 900 + s);
      CHECK(inlet_connected(g, w) == gt::bfs_inlet_connected(g, 0));
    }
  }
}
