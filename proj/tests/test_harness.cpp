#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "geotort/constrict.hpp"
#include "geotort/harness.hpp"
#include "test_support.hpp"

using namespace geotort;
namespace gt = geotort::testing;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

RunConfig synthetic_config() {
  RunConfig c;
  c.l = 8;
  c.h = 1;
  c.N = {8};
  c.alpha = {0.5};
  c.inlet_z = 4;
  c.volume_in = "unused";  // run_convergence_on takes the volume directly
  return c;
}

ConvergenceRow row(std::int64_t n, double alpha, double tau, double rmin = 1, double rmax = 1) {
  ConvergenceRow r;
  r.N = n;
  r.alpha = alpha;
  r.tau_hat = tau;
  r.r_min = rmin;
  r.r_max = rmax;
  return r;
}

}  // namespace

TEST_CASE("config parsing") {
  const std::string base =
      R"({"intensities":[3e-5,3e-5],"box":[-10,-10,-4,10,10,12],"h":1,"l":8,"N":[4,6],"alpha":[0.5],"seed":3)";
  SUBCASE("valid") {
    const RunConfig c = parse_run_config(base + "}");
    CHECK(c.intensities.size() == 2);
    CHECK(c.box.min().z() == -4);
    CHECK(c.N == std::vector<std::int64_t>{4, 6});
    CHECK(c.seed == 3);
    CHECK(c.phase == 1);
    CHECK_FALSE(c.clip_margins);
    CHECK_FALSE(c.timing_out.has_value());
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(parse_run_config(base + R"(,"bogus":1})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("{"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"N":[4],"alpha":[0.5]})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(base + R"(,"l":8.5})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(base + R"(,"N":[6,4]})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(base + R"(,"box":[0,0,0]})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(base + R"(,"intensities":[0]})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(base + R"(,"phase":"one"})"), ConfigError);
  }
}

TEST_CASE("sweep over an all-foreground volume") {
  const VoxelGrid solid({20, 20, 15}, 1.0, 1);
  const auto rows = run_convergence_on(solid, synthetic_config());
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].tau_hat == 1.0);
  CHECK(rows[0].p_hat == 1.0);
  CHECK(rows[0].margin == 3);
  CHECK(rows[0].margin_lateral == 3);
  CHECK(rows[0].margin_below == 3);
}

TEST_CASE("p_hat per window equals a direct count") {
  const auto g = gt::random_grid({24, 24, 16}, 0.5, 5);
  RunConfig c = synthetic_config();
  c.N = {6, 10};
  c.alpha = {0.25, 0.5};
  std::ostringstream csv;
  const auto rows = run_convergence_on(g, c, &csv);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].alpha == 0.25);  // alpha-major order
  CHECK(rows[1].N == 10);
  for (const auto& r : rows) {
    const WindowSpec w = WindowSpec::centered(g.dims(), r.N, 8, 4, 0, 0);
    CHECK(r.p_hat == static_cast<double>(gt::count_core(g, w)) / static_cast<double>(w.core_voxels()));
  }
  std::istringstream lines(csv.str());
  std::string header;
  std::getline(lines, header);
  CHECK(header == "N,alpha,margin,margin_lateral,margin_below,tau_hat,r_min,r_max,beta,p_hat");
  int count = 0;
  for (std::string line; std::getline(lines, line);) ++count;
  CHECK(count == 4);
}

TEST_CASE("windows that do not fit") {
  const VoxelGrid solid({12, 12, 15}, 1.0, 1);
  RunConfig c = synthetic_config();
  c.N = {8};
  c.alpha = {0.75};  // margin 5, only 2 voxels of lateral room
  CHECK_THROWS_AS(run_convergence_on(solid, c), ConfigError);
  c.clip_margins = true;
  const auto rows = run_convergence_on(solid, c);
  CHECK(rows[0].margin == 5);
  CHECK(rows[0].margin_lateral == 2);
  CHECK(rows[0].margin_below == 4);
}

TEST_CASE("generated runs are byte-identical") {
  const fs::path dir = fs::temp_directory_path() / "geotort_harness";
  fs::create_directories(dir);
  RunConfig c = parse_run_config(
      R"({"intensities":[2e-4,2e-4],"box":[-12,-12,-4,12,12,12],"h":1,"l":8,"N":[8,12],"alpha":[0.5],"seed":11,"sampling_margin":20})");
  std::string csv[2], vol[2];
  for (int run = 0; run < 2; ++run) {
    c.csv_out = dir / ("run" + std::to_string(run) + ".csv");
    c.volume_out = dir / ("run" + std::to_string(run) + ".mv1");
    c.timing_out = dir / ("run" + std::to_string(run) + "_timing.csv");
    run_convergence(c);
    csv[run] = slurp(c.csv_out);
    vol[run] = slurp(*c.volume_out);
  }
  CHECK(csv[0] == csv[1]);
  CHECK(vol[0] == vol[1]);
  CHECK(csv[0].find("runtime") == std::string::npos);
  CHECK(slurp(dir / "run0_timing.csv").rfind("N,alpha,runtime_ms\n", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("relative change") {
  CHECK(relative_change(2.0, 2.0) == 0.0);
  CHECK(relative_change(2.0, 2.1) == doctest::Approx(0.05));
  CHECK(std::isinf(relative_change(0.0, 1.0)));
  CHECK(std::isinf(relative_change(kNoRadius, 1.0)));
  CHECK(relative_change(kNoRadius, kNoRadius) == 0.0);
}

TEST_CASE("stabilization metric") {
  SUBCASE("constant sequence") {
    const std::vector<ConvergenceRow> rows{row(10, 0.5, 1.3), row(20, 0.5, 1.3), row(30, 0.5, 1.3)};
    const auto rep = stabilization_metric(rows, 3);
    CHECK(rep.per_alpha.at(0).tau_hat == 0.0);
    CHECK(rep.largest_n == 30);
  }
  SUBCASE("last two values") {
    const std::vector<ConvergenceRow> rows{row(10, 0.5, 2.0), row(20, 0.5, 2.0), row(30, 0.5, 2.1)};
    CHECK(stabilization_metric(rows, 2).per_alpha.at(0).tau_hat == doctest::Approx(0.05));
    CHECK(stabilization_metric(rows, 3).per_alpha.at(0).tau_hat == doctest::Approx(0.05));
  }
  SUBCASE("spread across alpha at the largest N") {
    const std::vector<ConvergenceRow> rows{row(10, 0.25, 1.0), row(20, 0.25, 2.0), row(10, 0.5, 1.0),
                                           row(20, 0.5, 2.02)};
    CHECK(stabilization_metric(rows, 2).spread_tau_hat == doctest::Approx(0.01));
  }
  SUBCASE("bad arguments") {
    const std::vector<ConvergenceRow> rows{row(10, 0.5, 2.0)};
    CHECK_THROWS_AS(stabilization_metric(rows, 1), std::invalid_argument);
    CHECK_THROWS_AS(stabilization_metric(rows, 2), std::invalid_argument);
  }
}

TEST_CASE("stabilization index") {
  const std::vector<ConvergenceRow> rows{row(10, 0.5, 1.5, 1, 3.0), row(20, 0.5, 1.4, 1, 3.3),
                                         row(30, 0.5, 1.31, 1, 3.3), row(40, 0.5, 1.3, 1, 3.3)};
  CHECK(stabilization_n(rows, 0.5, Estimator::r_max, 0.01) == 20);
  CHECK(stabilization_n(rows, 0.5, Estimator::tau_hat, 0.01) == 30);
  CHECK(stabilization_n(rows, 0.5, Estimator::tau_hat, 0.0) == 40);
  CHECK_THROWS_AS(stabilization_n(rows, 0.75, Estimator::tau_hat, 0.01), std::invalid_argument);
}
