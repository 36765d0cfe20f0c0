// geotort: tortuosity / constrictivity estimation and RNG microstructure generation.
//
// Exit codes: 0 success, 2 bad arguments or config, 3 input format error,
// 4 estimator undefined (empty phase), 1 anything else.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "geotort/constrict.hpp"
#include "geotort/csv.hpp"
#include "geotort/grid.hpp"
#include "geotort/harness.hpp"
#include "geotort/morph.hpp"
#include "geotort/rngmodel.hpp"
#include "geotort/tortuosity.hpp"

namespace {

using namespace geotort;

constexpr int kExitBadArgs = 2;
constexpr int kExitFormat = 3;
constexpr int kExitUndefined = 4;

struct WindowArgs {
  std::string input;
  int phase = 1;
  double l = 0.0;
  std::int64_t n = 0;
  double alpha = 0.0;
  std::int64_t margin_below = -1;
  std::int64_t inlet_z = -1;
};

void add_window_options(CLI::App* cmd, WindowArgs& a, bool window_required) {
  cmd->add_option("--in", a.input, "MV1 volume")->required();
  cmd->add_option("--phase", a.phase, "phase label to analyse")->check(CLI::Range(0, 255));
  auto* l = cmd->add_option("--l", a.l, "transport length (multiple of h)");
  auto* n = cmd->add_option("--N", a.n, "lateral window size in voxels")->check(CLI::PositiveNumber);
  auto* alpha = cmd->add_option("--alpha", a.alpha, "margin exponent, margin = ceil(N^alpha)");
  if (window_required) {
    l->required();
    n->required();
    alpha->required();
  }
  cmd->add_option("--inlet-z", a.inlet_z, "inlet slice index (default: the below-inlet margin)");
}

// Centered window with plus-sampling margins; without --N the whole grid is
// the core window and the inlet is slice 0.
WindowSpec window_from(const WindowArgs& a, const Dims& dims, double h) {
  if (a.n == 0) {
    WindowSpec w;
    w.wx = dims.nx;
    w.wy = dims.ny;
    w.oz = a.inlet_z >= 0 ? a.inlet_z : 0;
    w.height_n = a.l > 0.0 ? height_for_length(a.l, h) : dims.nz - 1 - w.oz;
    w.validate(dims, true);
    return w;
  }
  const std::int64_t margin = margin_for(a.n, a.alpha);
  const std::int64_t below = a.margin_below >= 0 ? a.margin_below : margin;
  const std::int64_t inlet = a.inlet_z >= 0 ? a.inlet_z : below;
  WindowSpec w = WindowSpec::centered(dims, a.n, height_for_length(a.l, h), inlet, margin, below);
  w.validate(dims, true);
  return w;
}

VoxelGrid load_phase(const WindowArgs& a) {
  return select_phase(load_volume(a.input), static_cast<std::uint8_t>(a.phase));
}

template <typename F>
int guarded(F&& body) {
  try {
    body();
    return 0;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFormat;
  } catch (const UndefinedEstimate& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUndefined;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadArgs;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geodesic tortuosity and constrictivity of voxelized microstructures"};
  app.set_help_flag("--help", "print this help and exit");  // -h would clash with --h
  app.require_subcommand(1);

  // generate
  double lambda1 = 0.0, lambda2 = 0.0, gen_h = 1.0, gen_margin = 50.0;
  std::uint64_t seed = 0;
  std::string box_text, gen_out, graphs_prefix;
  auto* generate = app.add_subcommand("generate", "sample a two-phase RNG Voronoi mollification");
  generate->add_option("--lambda1", lambda1, "intensity of phase 1")->required();
  generate->add_option("--lambda2", lambda2, "intensity of phase 2")->required();
  generate->add_option("--box", box_text, "x0,y0,z0,x1,y1,z1 of the voxel grid")->required();
  generate->add_option("--h", gen_h, "voxel spacing");
  generate->add_option("--seed", seed, "random seed")->required();
  generate->add_option("--out", gen_out, "output MV1 volume")->required();
  generate->add_option("--graphs", graphs_prefix, "also write RNG graphs as PREFIX_phaseK_{vertices,edges}.csv");
  generate->add_option("--margin", gen_margin, "sampling margin around the box");

  WindowArgs tort_args;
  bool tort_header = false;
  auto* tortuosity = app.add_subcommand("tortuosity", "mean geodesic tortuosity of one phase");
  add_window_options(tortuosity, tort_args, true);
  tortuosity->add_option("--margin-below", tort_args.margin_below, "voxels below the inlet (default: ceil(N^alpha))");
  tortuosity->add_flag("--header", tort_header, "print the CSV header first");

  WindowArgs cons_args;
  bool cons_header = false;
  auto* constrict = app.add_subcommand("constrictivity", "r_min, r_max and constrictivity of one phase");
  add_window_options(constrict, cons_args, true);
  constrict->add_flag("--header", cons_header, "print the CSV header first");

  WindowArgs prof_args;
  std::string mode = "opening", radii_text;
  auto* profile = app.add_subcommand("profile", "opening or intrusion volume versus radius");
  add_window_options(profile, prof_args, false);
  profile->add_option("--mode", mode, "opening|intrusion")->check(CLI::IsMember({"opening", "intrusion"}));
  profile->add_option("--radii", radii_text, "ascending radii r1,r2,...")->required();

  std::string config_path, conv_out;
  auto* convergence = app.add_subcommand("convergence", "window-growth study");
  convergence->add_option("--config", config_path, "JSON run configuration")->required();
  convergence->add_option("--out", conv_out, "output CSV (overrides csv_out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitBadArgs;
  }

  if (*generate) {
    return guarded([&] {
      const auto b = parse_number_list(box_text);
      if (b.size() != 6) throw std::invalid_argument("--box needs six numbers");
      GenerationConfig config;
      config.intensities = {lambda1, lambda2};
      config.box = Box(Point(b[0], b[1], b[2]), Point(b[3], b[4], b[5]));
      config.h = gen_h;
      config.margin = gen_margin;
      config.seed = seed;
      const Microstructure micro = generate_microstructure(config);
      save_volume(micro.volume, gen_out);
      if (!graphs_prefix.empty())
        for (std::size_t i = 0; i < micro.graphs.size(); ++i)
          write_graph_csv(micro.graphs[i], graphs_prefix + "_phase" + std::to_string(i + 1));
    });
  }
  if (*tortuosity) {
    return guarded([&] {
      const VoxelGrid grid = load_phase(tort_args);
      const WindowSpec w = window_from(tort_args, grid.dims(), grid.spacing());
      const TortuosityResult r = tortuosity_estimate(grid, w);
      if (tort_header) write_tortuosity_csv_header(std::cout);
      write_tortuosity_csv_row(std::cout, tort_args.n, tort_args.alpha, grid.spacing(), r);
    });
  }
  if (*constrict) {
    return guarded([&] {
      const VoxelGrid grid = load_phase(cons_args);
      const WindowSpec w = window_from(cons_args, grid.dims(), grid.spacing());
      const ConstrictivityResult r = constrictivity(grid, w);
      if (cons_header) write_constrictivity_csv_header(std::cout);
      write_constrictivity_csv_row(std::cout, cons_args.n, cons_args.alpha, r);
    });
  }
  if (*profile) {
    return guarded([&] {
      const VoxelGrid grid = load_phase(prof_args);
      const WindowSpec w = window_from(prof_args, grid.dims(), grid.spacing());
      const auto radii = parse_number_list(radii_text);
      const RadiusProfile p = mode == "opening" ? opening_volume_profile(grid, w, radii)
                                                : intrusion_volume_profile(grid, w, radii);
      write_profile_csv(std::cout, p);
    });
  }
  if (*convergence) {
    return guarded([&] {
      RunConfig config = load_run_config(config_path);
      if (!conv_out.empty()) config.csv_out = conv_out;
      if (config.csv_out.empty()) throw ConfigError("no output CSV given (--out or csv_out)");
      run_convergence(config);
    });
  }
  return 0;
}
