#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fpp/geodesic.hpp"
#include "fpp/stats.hpp"

namespace fpp {

// Parameter grid and execution settings of a simulation run.  Every
// (alpha, n) pair is one cell; cells are independent and resumable.
struct ExperimentConfig {
  std::vector<double> alphas;
  std::vector<std::int64_t> ns;
  int samples = 100;
  std::uint64_t master_seed = 1;
  int dim = 1;
  double window_factor = 8.0;     // W = window_factor * n^window_exponent
  double window_exponent = 0.75;
  double margin_fraction = 0.05;  // boundary-proximity threshold
  double jump_cap = kInf;         // absolute cap; infinity = unconstrained
  int threads = 1;
  std::string output_dir;
};

// Throws std::invalid_argument describing the first problem found.
void validate_config(const ExperimentConfig& cfg);

double window_half_width(const ExperimentConfig& cfg, std::int64_t n);

// Derivation of the per-sample seed: every sample is addressed by
// (master_seed, alpha index, n index, sample id), so cell order, thread
// count and resume points cannot change any draw.
std::uint64_t sample_seed(const ExperimentConfig& cfg, std::size_t alpha_index,
                          std::size_t n_index, std::int64_t sample_id);

struct CellOutcome {
  std::size_t alpha_index = 0;
  std::size_t n_index = 0;
  std::vector<SampleRecord> records;       // sample-id order
  std::vector<std::int64_t> unreachable;   // sample ids without any admissible path
  std::int64_t boundary_retries = 0;       // samples rerun once with doubled window
};

// Computes one cell: per sample, draw the environment, solve, and check the
// window margin; a boundary-touching sample is rerun once with the window
// doubled (same seed) and flagged as boundary_hit if it still touches.
// Parallel over samples with cfg.threads workers; output is identical for
// every thread count.
CellOutcome run_cell(const ExperimentConfig& cfg, std::size_t alpha_index,
                     std::size_t n_index);

// Runs the whole grid with file outputs under cfg.output_dir:
//   cells/a{i}_n{j}.csv          per-sample records
//   cells/a{i}_n{j}.summary.json cell aggregates
//   cells/a{i}_n{j}.done         completion marker (JSON: unreachable ids, retries)
//   exponents_a{i}.json          per-alpha log-log fits over the n grid
//   manifest.json                machine-readable index of all artifacts
// A cell whose marker already exists is loaded from disk instead of being
// recomputed, which makes interrupted runs resumable.  Progress and timing go
// to `log` only; no artifact contains wall-clock data, so outputs are
// byte-identical across runs, resumes and thread counts.
//
// Returns 0 on success, 4 when some cells failed (the rest are still
// written and recorded in the manifest).
int run_simulate(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace fpp
