#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "geotort/grid.hpp"
#include "geotort/rngmodel.hpp"

namespace geotort {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Parameters of a window-growth study. JSON keys match the field names.
struct RunConfig {
  std::vector<double> intensities;     // one per phase of the generated model
  Box box{Point::Zero(), Point::Zero()};  // physical extent of the voxel grid
  double sampling_margin = 50.0;       // Poisson points are sampled this far beyond box
  double h = 1.0;
  double l = 0.0;                      // transport length, inlet at physical z = 0
  std::vector<std::int64_t> N;         // lateral window sizes in voxels, ascending
  std::vector<double> alpha;           // margin exponents, margin = ceil(N^alpha)
  std::uint64_t seed = 0;
  std::uint8_t phase = 1;              // label analysed
  /// Shrink margins that would leave the grid instead of rejecting the config.
  bool clip_margins = false;
  std::optional<std::filesystem::path> volume_in;   // analyse a stored volume instead
  std::optional<std::int64_t> inlet_z;              // inlet slice index override
  std::optional<std::filesystem::path> volume_out;
  std::filesystem::path csv_out;
  std::optional<std::filesystem::path> timing_out;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

struct ConvergenceRow {
  std::int64_t N = 0;
  double alpha = 0.0;
  std::int64_t margin = 0;           // ceil(N^alpha)
  std::int64_t margin_lateral = 0;   // margins actually used
  std::int64_t margin_below = 0;
  double tau_hat = 0.0;
  double r_min = 0.0;
  double r_max = 0.0;
  double beta = 0.0;
  double p_hat = 0.0;
  double runtime_ms = 0.0;
};

/// Generates (or loads) one realization and evaluates every (alpha, N) window
/// on it, alpha-major. Rows are appended to config.csv_out as they finish.
std::vector<ConvergenceRow> run_convergence(const RunConfig& config);

/// Sweep over an already available phase volume; writes nothing.
std::vector<ConvergenceRow> run_convergence_on(const VoxelGrid& phase, const RunConfig& config,
                                               std::ostream* csv = nullptr, std::ostream* timing = nullptr);

void write_convergence_csv_header(std::ostream& out);
void write_convergence_csv_row(std::ostream& out, const ConvergenceRow& row);

enum class Estimator { tau_hat, r_min, r_max, beta, p_hat };
double value_of(const ConvergenceRow& row, Estimator e);

/// |b - a| / |a|; zero for equal values, infinite when undefined.
double relative_change(double a, double b);

struct StabilizationReport {
  struct PerAlpha {
    double alpha = 0.0;
    double tau_hat = 0.0;
    double r_min = 0.0;
    double r_max = 0.0;
  };
  std::vector<PerAlpha> per_alpha;  // max relative step over the last k values of N
  std::int64_t largest_n = 0;
  double spread_tau_hat = 0.0;      // (max - min) / min|.| across alpha at largest_n
  double spread_r_min = 0.0;
  double spread_r_max = 0.0;
};

StabilizationReport stabilization_metric(const std::vector<ConvergenceRow>& rows, std::size_t k);

/// Smallest N from which every later value of the estimator stays within
/// tolerance (relative) of the value at the largest N, for one alpha.
std::int64_t stabilization_n(const std::vector<ConvergenceRow>& rows, double alpha, Estimator e, double tolerance);

}  // namespace geotort
