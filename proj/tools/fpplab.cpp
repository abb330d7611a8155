// fpplab: command-line laboratory for layered first-passage simulations.
//
// Subcommands:
//   simulate  - run an (alpha, n) grid of samples with per-cell CSV/JSON output
//   dump      - solve a single environment and dump the optimal path as JSON lines
//   blackface - Monte Carlo estimate of the slab blackness probability
//   tunnel    - build a tunneling-tube fixture and verify the forced-jump property
//
// Exit codes: 0 success, 2 configuration error, 3 no admissible path in a
// single-run command, 4 partial batch failure.
//
// Environment overrides (applied after flag parsing): FPPLAB_OUTPUT_DIR
// replaces the simulate output directory, FPPLAB_THREADS the worker count.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fpp/environment.hpp"
#include "fpp/experiment.hpp"
#include "fpp/geodesic.hpp"
#include "fpp/proofcheck.hpp"
#include "fpp/stats.hpp"

namespace {

using nlohmann::json;

int cmd_simulate(fpp::ExperimentConfig cfg) {
  if (const char* dir = std::getenv("FPPLAB_OUTPUT_DIR")) cfg.output_dir = dir;
  if (const char* thr = std::getenv("FPPLAB_THREADS")) cfg.threads = std::atoi(thr);
  try {
    fpp::validate_config(cfg);
    if (cfg.output_dir.empty())
      throw std::invalid_argument("simulate: --out (or FPPLAB_OUTPUT_DIR) required");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return fpp::run_simulate(cfg, std::cerr);
}

struct DumpArgs {
  double alpha = 1.0;
  std::int64_t n = 64;
  std::uint64_t seed = 1;
  int dim = 1;
  double window_factor = 8.0;
  double window_exponent = 0.75;
  double jump_cap = fpp::kInf;
  std::string out = "-";
};

int cmd_dump(const DumpArgs& a) {
  fpp::ExperimentConfig wcfg;
  wcfg.window_factor = a.window_factor;
  wcfg.window_exponent = a.window_exponent;
  const double w = fpp::window_half_width(wcfg, a.n);
  const fpp::Environment env = fpp::sample_environment(
      a.n, a.dim, fpp::WindowSpec{w, a.dim}, a.seed);

  fpp::SolverOptions opt;
  opt.alpha = a.alpha;
  opt.constraint = fpp::JumpConstraint::capped(a.jump_cap);
  const auto geo = fpp::geodesic_to_hyperplane(env, opt);
  if (!geo) {
    std::cerr << "error: no admissible path under cap " << a.jump_cap << "\n";
    return 3;
  }
  if (a.out == "-") {
    fpp::serialize_geodesic(*geo, a.n, a.seed, std::cout);
  } else {
    std::ofstream out(a.out, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot open " << a.out << "\n";
      return 2;
    }
    fpp::serialize_geodesic(*geo, a.n, a.seed, out);
  }
  return 0;
}

struct BlackfaceArgs {
  double alpha = 0.5;
  double c1 = 0.01;
  double n_scale = 0.0;
  double beta = 0.0;
  double ell = 0.0;
  int length = 0;
  double big_m = 2.0;
  double grid_step = 0.25;
  int dim = 1;
  std::int64_t trials = 100;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_blackface(const BlackfaceArgs& a) {
  fpp::FaceSpec face;
  if (a.ell > 0.0) {
    face.ell = a.ell;
    face.length = a.length > 0 ? a.length : static_cast<int>(std::ceil(a.ell - 1e-6));
    face.beta = a.beta;
  } else if (a.n_scale > 1.0) {
    face = fpp::make_face_spec(a.n_scale, a.beta, 0,
                               fpp::SpacePoint(a.dim, 0.0), a.c1, a.big_m,
                               a.alpha, a.grid_step);
    if (a.length > 0) face.length = a.length;
  } else {
    std::cerr << "error: need --ell or --n-scale\n";
    return 2;
  }
  face.center = fpp::SpacePoint(a.dim, 0.0);
  face.c1 = a.c1;
  face.big_m = a.big_m;
  face.alpha = a.alpha;
  face.grid_step = a.grid_step;

  const auto p = fpp::estimate_black_probability(face, a.trials, a.seed);
  const std::string report = fpp::black_report_json(face, p);
  if (a.out.empty()) {
    std::cout << report << "\n";
  } else {
    std::ofstream out(a.out, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot open " << a.out << "\n";
      return 2;
    }
    out << report << "\n";
  }
  return 0;
}

struct TunnelArgs {
  int length = 8;
  double gap = 6.0;
  double narrow_radius = 0.25;
  double wide_radius = 24.0;
  double alpha = 0.5;
  int dim = 1;
  std::vector<double> drift;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_tunnel(const TunnelArgs& a) {
  fpp::TubeSpec spec;
  spec.anchor = fpp::SpacePoint(a.dim, 0.0);
  spec.anchor_time = 0;
  spec.drift = a.drift.empty() ? fpp::SpacePoint(a.dim, 0.0) : a.drift;
  if (static_cast<int>(spec.drift.size()) != a.dim) {
    std::cerr << "error: --drift must have --dim components\n";
    return 2;
  }
  spec.length = a.length;
  spec.gap = a.gap;
  spec.narrow_radius = a.narrow_radius;
  spec.wide_radius = a.wide_radius;
  spec.alpha = a.alpha;

  const auto tube = fpp::build_tunneling_tube(spec, a.seed);
  const fpp::Environment env = fpp::tube_environment(tube, spec);
  if (!a.out.empty()) {
    std::ofstream out(a.out, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot open " << a.out << "\n";
      return 2;
    }
    fpp::serialize_environment(env, out);
  }

  fpp::SolverOptions opt;
  opt.alpha = a.alpha;
  opt.constraint = fpp::JumpConstraint::capped(fpp::tube_jump_cap(spec));
  const auto geo = fpp::geodesic_to_hyperplane(env, opt);
  if (!geo) {
    std::cerr << "error: capped solve found no path through the tube\n";
    return 3;
  }

  const double drift_norm = fpp::euclidean_norm(spec.drift);
  const double lo = 1.5 * spec.gap - 2.0 * spec.narrow_radius - drift_norm;
  const double hi = 1.5 * spec.gap + 2.0 * spec.narrow_radius + drift_norm;
  const double mij = fpp::max_interior_jump(*geo);

  json report;
  report["length"] = spec.length;
  report["gap"] = spec.gap;
  report["narrow_radius"] = spec.narrow_radius;
  report["wide_radius"] = spec.wide_radius;
  report["alpha"] = spec.alpha;
  report["drift"] = spec.drift;
  report["jump_cap"] = fpp::tube_jump_cap(spec);
  report["is_tunneling"] = fpp::is_tunneling(tube, spec);
  report["passage_time"] = geo->passage_time;
  report["max_interior_jump"] = mij;
  report["forced_jump_center"] = 1.5 * spec.gap;
  report["forced_jump_bracket"] = {lo, hi};
  report["within_bracket"] = mij >= lo - 1e-9 && mij <= hi + 1e-9;
  std::cout << report.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"layered first-passage percolation laboratory"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "INI file with [subcommand] sections holding option values");

  fpp::ExperimentConfig cfg;
  CLI::App* sim = app.add_subcommand("simulate", "run an (alpha, n) sample grid");
  sim->add_option("--alpha", cfg.alphas, "alpha values of the grid")->required();
  sim->add_option("--n", cfg.ns, "layer counts of the grid (increasing)")->required();
  sim->add_option("--samples", cfg.samples, "samples per cell");
  sim->add_option("--seed", cfg.master_seed, "master seed");
  sim->add_option("--dim", cfg.dim, "spatial dimension");
  sim->add_option("--window-factor", cfg.window_factor, "window W = factor * n^exponent");
  sim->add_option("--window-exponent", cfg.window_exponent, "window growth exponent");
  sim->add_option("--margin-fraction", cfg.margin_fraction,
                  "boundary margin as a fraction of W");
  sim->add_option("--jump-cap", cfg.jump_cap, "absolute cap on jump lengths");
  sim->add_option("--threads", cfg.threads, "worker threads");
  sim->add_option("--out", cfg.output_dir, "output directory");

  DumpArgs dump;
  CLI::App* dmp = app.add_subcommand("dump", "dump one optimal path as JSON lines");
  dmp->add_option("--alpha", dump.alpha, "jump cost exponent")->required();
  dmp->add_option("--n", dump.n, "number of layers")->required();
  dmp->add_option("--seed", dump.seed, "environment seed");
  dmp->add_option("--dim", dump.dim, "spatial dimension");
  dmp->add_option("--window-factor", dump.window_factor, "window factor");
  dmp->add_option("--window-exponent", dump.window_exponent, "window exponent");
  dmp->add_option("--jump-cap", dump.jump_cap, "absolute cap on jump lengths");
  dmp->add_option("--out", dump.out, "output file, or - for stdout");

  BlackfaceArgs bf;
  CLI::App* bfc = app.add_subcommand("blackface",
                                     "estimate the slab blackness probability");
  bfc->add_option("--alpha", bf.alpha, "jump cost exponent (!= 1)")->required();
  bfc->add_option("--c1", bf.c1, "threshold constant")->required();
  bfc->add_option("--n-scale", bf.n_scale, "scale parameter n (ell = (log n)^beta)");
  bfc->add_option("--beta", bf.beta, "scale exponent beta");
  bfc->add_option("--ell", bf.ell, "slab scale ell given directly");
  bfc->add_option("--length", bf.length, "layers per block (default ceil(ell))");
  bfc->add_option("--big-m", bf.big_m, "lattice search multiplier (alpha > 1)");
  bfc->add_option("--grid-step", bf.grid_step, "start grid resolution h <= 0.5");
  bfc->add_option("--dim", bf.dim, "spatial dimension (<= 4)");
  bfc->add_option("--trials", bf.trials, "Monte Carlo trials");
  bfc->add_option("--seed", bf.seed, "trial seed");
  bfc->add_option("--out", bf.out, "report file (default stdout)");

  TunnelArgs tn;
  CLI::App* tun = app.add_subcommand("tunnel",
                                     "build and verify a tunneling-tube fixture");
  tun->add_option("--length", tn.length, "tube length in layers (>= 2)");
  tun->add_option("--gap", tn.gap, "detour scale");
  tun->add_option("--narrow-radius", tn.narrow_radius, "interior ball radius");
  tun->add_option("--wide-radius", tn.wide_radius, "exclusion radius");
  tun->add_option("--alpha", tn.alpha, "jump cost exponent");
  tun->add_option("--dim", tn.dim, "spatial dimension");
  tun->add_option("--drift", tn.drift, "per-layer drift vector");
  tun->add_option("--seed", tn.seed, "fixture seed");
  tun->add_option("--out", tn.out, "write the embedded environment here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sim->parsed()) return cmd_simulate(cfg);
    if (dmp->parsed()) return cmd_dump(dump);
    if (bfc->parsed()) return cmd_blackface(bf);
    if (tun->parsed()) return cmd_tunnel(tn);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 2;
}
