#include "geotort/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include <json.hpp>

#include "geotort/constrict.hpp"
#include "geotort/csv.hpp"
#include "geotort/tortuosity.hpp"

namespace geotort {

namespace {

using nlohmann::json;

const std::set<std::string> kConfigKeys = {"intensities", "box",     "sampling_margin", "h",         "l",
                                           "N",           "alpha",   "seed",            "phase",     "clip_margins",
                                           "volume_in",   "inlet_z", "volume_out",      "csv_out",   "timing_out"};

template <typename T>
T required(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing config key '") + key + "'");
  return j.at(key).get<T>();
}

void validate(const RunConfig& c) {
  if (!c.volume_in && c.intensities.empty()) throw ConfigError("intensities required when no volume_in is given");
  for (double lambda : c.intensities)
    if (!(lambda > 0.0)) throw ConfigError("intensities must be positive");
  if (!c.volume_in && !((c.box.max() - c.box.min()).minCoeff() > 0.0)) throw ConfigError("box must be nondegenerate");
  if (!(c.h > 0.0)) throw ConfigError("h must be positive");
  if (c.N.empty() || c.alpha.empty()) throw ConfigError("N and alpha must be non-empty");
  for (std::size_t i = 0; i < c.N.size(); ++i) {
    if (c.N[i] <= 0) throw ConfigError("window sizes must be positive");
    if (i > 0 && c.N[i] <= c.N[i - 1]) throw ConfigError("N sequence must be strictly ascending");
  }
  for (double a : c.alpha)
    if (!(a >= 0.0)) throw ConfigError("alpha values must be non-negative");
  try {
    height_for_length(c.l, c.h);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::int64_t inlet_index(const RunConfig& c) {
  if (c.inlet_z) return *c.inlet_z;
  return static_cast<std::int64_t>(std::llround(-c.box.min().z() / c.h));
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!kConfigKeys.contains(key)) throw ConfigError("unknown config key '" + key + "'");

  RunConfig c;
  try {
    if (j.contains("intensities")) c.intensities = j.at("intensities").get<std::vector<double>>();
    if (j.contains("box")) {
      const auto b = j.at("box").get<std::vector<double>>();
      if (b.size() != 6) throw ConfigError("box needs six numbers x0,y0,z0,x1,y1,z1");
      c.box = Box(Point(b[0], b[1], b[2]), Point(b[3], b[4], b[5]));
    }
    if (j.contains("sampling_margin")) c.sampling_margin = j.at("sampling_margin").get<double>();
    if (j.contains("h")) c.h = j.at("h").get<double>();
    c.l = required<double>(j, "l");
    c.N = required<std::vector<std::int64_t>>(j, "N");
    c.alpha = required<std::vector<double>>(j, "alpha");
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("phase")) c.phase = j.at("phase").get<std::uint8_t>();
    if (j.contains("clip_margins")) c.clip_margins = j.at("clip_margins").get<bool>();
    if (j.contains("volume_in")) c.volume_in = j.at("volume_in").get<std::string>();
    if (j.contains("inlet_z")) c.inlet_z = j.at("inlet_z").get<std::int64_t>();
    if (j.contains("volume_out")) c.volume_out = j.at("volume_out").get<std::string>();
    if (j.contains("csv_out")) c.csv_out = j.at("csv_out").get<std::string>();
    if (j.contains("timing_out")) c.timing_out = j.at("timing_out").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  validate(c);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str());
}

void write_convergence_csv_header(std::ostream& out) {
  out << "N,alpha,margin,margin_lateral,margin_below,tau_hat,r_min,r_max,beta,p_hat\n";
}

void write_convergence_csv_row(std::ostream& out, const ConvergenceRow& r) {
  out << r.N << ',' << format_number(r.alpha) << ',' << r.margin << ',' << r.margin_lateral << ',' << r.margin_below
      << ',' << format_number(r.tau_hat) << ',' << format_number(r.r_min) << ',' << format_number(r.r_max) << ','
      << format_number(r.beta) << ',' << format_number(r.p_hat) << '\n';
}

std::vector<ConvergenceRow> run_convergence_on(const VoxelGrid& phase, const RunConfig& config, std::ostream* csv,
                                               std::ostream* timing) {
  validate(config);
  const Dims dims = phase.dims();
  const std::int64_t height = height_for_length(config.l, config.h);
  const std::int64_t inlet = inlet_index(config);

  // Reject overflowing windows before any work is done.
  for (double alpha : config.alpha)
    for (std::int64_t n : config.N) {
      const std::int64_t m = margin_for(n, alpha);
      WindowSpec w = WindowSpec::centered(dims, n, height, inlet, m, m);
      if (config.clip_margins) w = w.clipped_to(dims);
      try {
        w.validate(dims, true);
      } catch (const WindowError& e) {
        throw ConfigError("window N=" + std::to_string(n) + " alpha=" + format_number(alpha) +
                          " does not fit the volume: " + e.what());
      }
    }

  // Erosion sees the whole realization; only connectivity depends on the window.
  const auto inner = std::make_shared<const DistanceField>(inner_distance_squared(phase));

  if (csv) write_convergence_csv_header(*csv);
  if (timing) *timing << "N,alpha,runtime_ms\n";
  std::vector<ConvergenceRow> rows;
  for (double alpha : config.alpha)
    for (std::int64_t n : config.N) {
      const auto start = std::chrono::steady_clock::now();
      ConvergenceRow row;
      row.N = n;
      row.alpha = alpha;
      row.margin = margin_for(n, alpha);
      WindowSpec w = WindowSpec::centered(dims, n, height, inlet, row.margin, row.margin);
      if (config.clip_margins) w = w.clipped_to(dims);
      row.margin_lateral = w.margin_lateral;
      row.margin_below = w.margin_below;

      const VoxelGrid local = extract_window(phase, w, true);
      const WindowSpec local_w = w.relative_to_extract(true);
      row.tau_hat = tortuosity_estimate(local, local_w).tau_hat;
      const ConstrictivityResult c = constrictivity(RadiusSearch(inner, phase, w));
      row.r_min = c.r_min;
      row.r_max = c.r_max;
      row.beta = c.beta;
      row.p_hat = c.p_hat;
      row.runtime_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      if (csv) {
        write_convergence_csv_row(*csv, row);
        csv->flush();
      }
      if (timing) *timing << n << ',' << format_number(alpha) << ',' << format_number(row.runtime_ms) << std::endl;
      rows.push_back(row);
    }
  return rows;
}

std::vector<ConvergenceRow> run_convergence(const RunConfig& config) {
  validate(config);
  VoxelGrid phase;
  if (config.volume_in) {
    phase = select_phase(load_volume(*config.volume_in), config.phase);
  } else {
    GenerationConfig gen;
    gen.intensities = config.intensities;
    gen.box = config.box;
    gen.margin = config.sampling_margin;
    gen.h = config.h;
    gen.seed = config.seed;
    const Microstructure micro = generate_microstructure(gen);
    if (config.volume_out) save_volume(micro.volume, *config.volume_out);
    if (config.phase < 1 || config.phase > micro.volume.phase_count) throw ConfigError("phase label out of range");
    phase = select_phase(micro.volume, config.phase);
  }
  std::ofstream csv, timing;
  if (!config.csv_out.empty()) csv = open_output(config.csv_out);
  if (config.timing_out) timing = open_output(*config.timing_out);
  return run_convergence_on(phase, config, config.csv_out.empty() ? nullptr : &csv,
                            config.timing_out ? &timing : nullptr);
}

double value_of(const ConvergenceRow& row, Estimator e) {
  switch (e) {
    case Estimator::tau_hat: return row.tau_hat;
    case Estimator::r_min: return row.r_min;
    case Estimator::r_max: return row.r_max;
    case Estimator::beta: return row.beta;
    case Estimator::p_hat: return row.p_hat;
  }
  return 0.0;
}

double relative_change(double a, double b) {
  if (a == b) return 0.0;
  if (!std::isfinite(a) || !std::isfinite(b) || a == 0.0) return std::numeric_limits<double>::infinity();
  return std::abs(b - a) / std::abs(a);
}

namespace {

std::map<double, std::vector<const ConvergenceRow*>> rows_by_alpha(const std::vector<ConvergenceRow>& rows) {
  std::map<double, std::vector<const ConvergenceRow*>> out;
  for (const auto& r : rows) out[r.alpha].push_back(&r);
  for (auto& [alpha, list] : out)
    std::sort(list.begin(), list.end(), [](auto* a, auto* b) { return a->N < b->N; });
  return out;
}

double spread(const std::vector<double>& values) {
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) return 0.0;
  if (!std::isfinite(*lo) || !std::isfinite(*hi)) return std::numeric_limits<double>::infinity();
  double smallest = std::numeric_limits<double>::infinity();
  for (double v : values) smallest = std::min(smallest, std::abs(v));
  return smallest == 0.0 ? std::numeric_limits<double>::infinity() : (*hi - *lo) / smallest;
}

}  // namespace

StabilizationReport stabilization_metric(const std::vector<ConvergenceRow>& rows, std::size_t k) {
  if (k < 2) throw std::invalid_argument("stabilization window needs at least two values");
  const auto grouped = rows_by_alpha(rows);
  if (grouped.empty()) throw std::invalid_argument("no rows");
  StabilizationReport report;
  report.largest_n = rows.front().N;
  for (const auto& r : rows) report.largest_n = std::max(report.largest_n, r.N);

  std::vector<double> tau_at_max, rmin_at_max, rmax_at_max;
  for (const auto& [alpha, list] : grouped) {
    if (list.size() < k) throw std::invalid_argument("fewer than k rows for alpha " + format_number(alpha));
    StabilizationReport::PerAlpha entry;
    entry.alpha = alpha;
    for (std::size_t i = list.size() - k + 1; i < list.size(); ++i) {
      entry.tau_hat = std::max(entry.tau_hat, relative_change(list[i - 1]->tau_hat, list[i]->tau_hat));
      entry.r_min = std::max(entry.r_min, relative_change(list[i - 1]->r_min, list[i]->r_min));
      entry.r_max = std::max(entry.r_max, relative_change(list[i - 1]->r_max, list[i]->r_max));
    }
    report.per_alpha.push_back(entry);
    if (list.back()->N == report.largest_n) {
      tau_at_max.push_back(list.back()->tau_hat);
      rmin_at_max.push_back(list.back()->r_min);
      rmax_at_max.push_back(list.back()->r_max);
    }
  }
  if (!tau_at_max.empty()) {
    report.spread_tau_hat = spread(tau_at_max);
    report.spread_r_min = spread(rmin_at_max);
    report.spread_r_max = spread(rmax_at_max);
  }
  return report;
}

std::int64_t stabilization_n(const std::vector<ConvergenceRow>& rows, double alpha, Estimator e, double tolerance) {
  std::vector<const ConvergenceRow*> list;
  for (const auto& r : rows)
    if (r.alpha == alpha) list.push_back(&r);
  if (list.empty()) throw std::invalid_argument("no rows for alpha " + format_number(alpha));
  std::sort(list.begin(), list.end(), [](auto* a, auto* b) { return a->N < b->N; });
  const double last = value_of(*list.back(), e);
  std::size_t first_stable = list.size() - 1;
  for (std::size_t i = list.size(); i-- > 0;) {
    if (relative_change(last, value_of(*list[i], e)) > tolerance) break;
    first_stable = i;
  }
  return list[first_stable]->N;
}

}  // namespace geotort
