#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "geotort/rngmodel.hpp"
#include "test_support.hpp"

using namespace geotort;
namespace gt = geotort::testing;

namespace {

using Edges = std::vector<std::array<std::uint32_t, 2>>;

std::vector<Point> uniform_points(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point> pts(n);
  for (auto& p : pts) p = Point(u(rng), u(rng), u(rng));
  return pts;
}

}  // namespace

TEST_CASE("seed splitting") {
  CHECK(split_seed(1, 0) != split_seed(1, 1));
  CHECK(split_seed(1, 0) != split_seed(2, 0));
  CHECK(split_seed(5, 3) == split_seed(5, 3));
}

TEST_CASE("Poisson sampling") {
  const Box box(Point(0, 0, 0), Point(10, 10, 10));
  SUBCASE("deterministic per seed") {
    const auto a = sample_poisson(0.05, box, 9);
    const auto b = sample_poisson(0.05, box, 9);
    CHECK(a.points == b.points);
    CHECK(a.points != sample_poisson(0.05, box, 10).points);
  }
  SUBCASE("points lie in the box") {
    for (const auto& p : sample_poisson(0.5, box, 3).points) CHECK(box.contains(p));
  }
  SUBCASE("count moments at mean 100") {
    const int runs = 2000;
    std::vector<double> counts;
    for (int s = 0; s < runs; ++s) counts.push_back(static_cast<double>(sample_poisson(0.1, box, 7000 + s).points.size()));
    const double mean = std::accumulate(counts.begin(), counts.end(), 0.0) / runs;
    double var = 0;
    for (double c : counts) var += (c - mean) * (c - mean);
    var /= runs - 1;
    CHECK(mean >= 98.0);
    CHECK(mean <= 102.0);
    CHECK(var / mean >= 0.85);
    CHECK(var / mean <= 1.15);
  }
  SUBCASE("invalid input") {
    CHECK_THROWS_AS(sample_poisson(1.0, Box(Point(0, 0, 0), Point(1, 1, 0)), 1), std::invalid_argument);
    CHECK_THROWS_AS(sample_poisson(0.0, box, 1), std::invalid_argument);
    CHECK_THROWS_AS(sample_poisson(-1.0, box, 1), std::invalid_argument);
  }
}

TEST_CASE("lune test") {
  const Point a(0, 0, 0), b(2, 0, 0);
  CHECK(in_lune(a, b, Point(1, 0, 0)));
  CHECK(in_lune(a, b, Point(1, std::sqrt(3.0) - 1e-9, 0)));
  CHECK_FALSE(in_lune(a, b, Point(1, 1.8, 0)));
  CHECK_FALSE(in_lune(a, b, Point(3, 0, 0)));
}

TEST_CASE("RNG small configurations") {
  SUBCASE("collinear points") {
    const std::vector<Point> pts{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
    CHECK(build_rng_graph(pts).edges == Edges{{0, 1}, {1, 2}});
  }
  SUBCASE("unit square has its sides only") {
    const std::vector<Point> pts{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
    const auto g = build_rng_graph(pts);
    CHECK(g.edges == Edges{{0, 1}, {0, 3}, {1, 2}, {2, 3}});
    CHECK(g.edges == gt::brute_rng_edges(pts));
  }
  SUBCASE("degenerate inputs") {
    CHECK(build_rng_graph(std::vector<Point>{}).edges.empty());
    CHECK(build_rng_graph(std::vector<Point>{{1, 2, 3}}).edges.empty());
    CHECK(build_rng_graph(std::vector<Point>{{0, 0, 0}, {5, 5, 5}}).edges == Edges{{0, 1}});
    CHECK_THROWS_AS(build_rng_graph(std::vector<Point>{{0, 0, 0}, {0, 0, 0}}), std::invalid_argument);
  }
}

TEST_CASE("RNG equals brute-force lune construction") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto pts = uniform_points(200, 300 + s);
    CHECK(build_rng_graph(pts).edges == gt::brute_rng_edges(pts));
  }
  SUBCASE("clustered and lattice-like inputs") {
    std::vector<Point> pts = uniform_points(60, 1);
    for (auto& p : pts) p *= 0.01;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) pts.emplace_back(10 + i, 10 + j, 3);  // exact ties in the lune test
    pts.emplace_back(40, 0, 0);
    CHECK(build_rng_graph(pts).edges == gt::brute_rng_edges(pts));
  }
}

TEST_CASE("RNG of a Poisson sample is connected") {
  const auto sample = sample_poisson(1e-3, Box(Point(0, 0, 0), Point(100, 100, 100)), 4);
  const auto g = build_rng_graph(sample.points);
  std::vector<std::uint32_t> parent(g.vertices.size());
  std::iota(parent.begin(), parent.end(), 0u);
  auto find = [&](std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [a, b] : g.edges) parent[find(a)] = find(b);
  std::size_t roots = 0;
  for (std::uint32_t i = 0; i < parent.size(); ++i) roots += find(i) == i;
  CHECK(roots == 1);
}

TEST_CASE("mollification") {
  SUBCASE("one phase labels every voxel") {
    MollificationSpec spec;
    spec.graphs = {GeometricGraph{{Point(3, 3, 3)}, {}}};
    spec.dims = {6, 6, 6};
    const auto v = voxelize_mollification(spec);
    CHECK(v.phase_count == 1);
    CHECK(count_foreground(select_phase(v, 1)) == 216);
  }
  SUBCASE("two vertices split at the bisector, ties to phase 1") {
    MollificationSpec spec;
    spec.h = 0.5;
    spec.spacing = 0.25;
    spec.graphs = {GeometricGraph{{Point(0, 0, 0)}, {}}, GeometricGraph{{Point(5, 0, 0)}, {}}};
    spec.dims = {11, 3, 3};
    const auto v = voxelize_mollification(spec);
    for (std::int64_t z = 0; z < 3; ++z)
      for (std::int64_t y = 0; y < 3; ++y)
        for (std::int64_t x = 0; x < 11; ++x) {
          const Point c(x * 0.5, y * 0.5, z * 0.5);
          const double d1 = c.norm(), d2 = (c - Point(5, 0, 0)).norm();
          CHECK(v.labels(x, y, z) == (d1 <= d2 ? 1 : 2));
          CHECK(v.labels(x, y, z) == (x <= 5 ? 1 : 2));
        }
    const auto both = mollification_mask(spec, 2);
    CHECK(both(5, 0, 0) == 1);  // the bisector voxel belongs to both closed phases
    CHECK(both(4, 0, 0) == 0);
  }
  SUBCASE("random instances against exact segment distances") {
    const Dims dims{32, 32, 32};
    const double h = 1.0, spacing = 0.5;
    // rounding a sample to the nearest voxel moves it by up to sqrt(3)/2 h,
    // and consecutive samples leave gaps of at most spacing / 2
    const double per_phase = std::sqrt(3.0) / 2 * h + spacing / 2;
    std::int64_t literal_band_misses = 0, derived_band_misses = 0, compared = 0;
    for (std::uint64_t s = 0; s < 12; ++s) {
      MollificationSpec spec;
      spec.dims = dims;
      spec.h = h;
      spec.spacing = spacing;
      spec.pad_voxels = 8;
      const Box box(Point::Constant(-8), Point::Constant(39));
      for (int phase = 0; phase < 2; ++phase)
        spec.graphs.push_back(build_rng_graph(sample_poisson(2e-4, box, split_seed(800 + s, phase)).points));
      const auto v = voxelize_mollification(spec);
      const auto d1 = skeleton_distance(spec, 0), d2 = skeleton_distance(spec, 1);
      for (std::int64_t i = 0; i < v.labels.size(); ++i) {
        const auto p = dims.decode(i);
        const Point c(p[0] * h, p[1] * h, p[2] * h);
        const double e1 = gt::graph_distance(c, spec.graphs[0]), e2 = gt::graph_distance(c, spec.graphs[1]);
        const int exact = e1 <= e2 ? 1 : 2;
        const double gap = std::abs(std::sqrt(double(d1[i])) - std::sqrt(double(d2[i]))) * h;
        ++compared;
        if (v.labels[i] != exact) {
          literal_band_misses += gap > 2 * spacing;
          derived_band_misses += gap > 2 * per_phase;
        }
      }
    }
    MESSAGE("voxels compared: " << compared << ", mislabeled outside the 2*spacing band: " << literal_band_misses);
    CHECK(derived_band_misses == 0);
  }
}

TEST_CASE("grid sizing and generation") {
  CHECK(grid_dims_for_box(Box(Point(-150, -150, -40), Point(150, 150, 120)), 1.0) == Dims{301, 301, 161});
  CHECK(grid_dims_for_box(Box(Point(0, 0, 0), Point(1, 1, 1)), 0.1) == Dims{11, 11, 11});
  CHECK_THROWS_AS(grid_dims_for_box(Box(Point(0, 0, 0), Point(1, 1, 1)), 0.0), std::invalid_argument);

  GenerationConfig config;
  config.intensities = {5e-4, 5e-4};
  config.box = Box(Point(-10, -10, -5), Point(10, 10, 15));
  config.margin = 10;
  config.seed = 42;
  const auto a = generate_microstructure(config);
  const auto b = generate_microstructure(config);
  CHECK(a.volume == b.volume);
  CHECK(a.volume.phase_count == 2);
  CHECK(a.volume.labels.dims() == Dims{21, 21, 21});
  const auto ones = count_foreground(select_phase(a.volume, 1));
  CHECK(ones > 0);
  CHECK(ones < a.volume.labels.size());
  config.seed = 43;
  CHECK_FALSE(generate_microstructure(config).volume == a.volume);
}

TEST_CASE("graph csv") {
  GeometricGraph g{{Point(0, 0, 0), Point(1.5, 2, -1)}, {{0, 1}}};
  const auto prefix = std::filesystem::temp_directory_path() / "geotort_graph";
  write_graph_csv(g, prefix);
  std::ifstream v(prefix.string() + "_vertices.csv"), e(prefix.string() + "_edges.csv");
  const std::string vs{std::istreambuf_iterator<char>(v), {}}, es{std::istreambuf_iterator<char>(e), {}};
  CHECK(vs == "id,x,y,z\n0,0,0,0\n1,1.5,2,-1\n");
  CHECK(es == "a,b\n0,1\n");
}
