#include "fpp/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "fpp/environment.hpp"
#include "fpp/rng.hpp"

namespace fpp {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string cell_stem(std::size_t ai, std::size_t ni) {
  return "a" + std::to_string(ai) + "_n" + std::to_string(ni);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.alphas.empty())
    throw std::invalid_argument("config: need at least one alpha");
  for (double a : cfg.alphas)
    if (!(a > 0.0) || !std::isfinite(a))
      throw std::invalid_argument("config: alpha must be positive and finite");
  if (cfg.ns.empty()) throw std::invalid_argument("config: need at least one n");
  for (std::size_t i = 0; i < cfg.ns.size(); ++i) {
    if (cfg.ns[i] <= 0) throw std::invalid_argument("config: n must be positive");
    if (i > 0 && cfg.ns[i] <= cfg.ns[i - 1])
      throw std::invalid_argument("config: n grid must be strictly increasing");
  }
  if (cfg.samples <= 0)
    throw std::invalid_argument("config: samples must be positive");
  if (cfg.dim <= 0) throw std::invalid_argument("config: dim must be positive");
  if (!(cfg.window_factor > 0.0))
    throw std::invalid_argument("config: window factor must be positive");
  if (!(cfg.window_exponent > 0.0) || cfg.window_exponent >= 1.0)
    throw std::invalid_argument("config: window exponent must be in (0, 1)");
  if (!(cfg.margin_fraction > 0.0) || !(cfg.margin_fraction < 0.5))
    throw std::invalid_argument("config: margin fraction must be in (0, 0.5)");
  if (!(cfg.jump_cap > 0.0))
    throw std::invalid_argument("config: jump cap must be positive");
  if (cfg.threads <= 0)
    throw std::invalid_argument("config: threads must be positive");
}

double window_half_width(const ExperimentConfig& cfg, std::int64_t n) {
  return cfg.window_factor *
         std::pow(static_cast<double>(n), cfg.window_exponent);
}

std::uint64_t sample_seed(const ExperimentConfig& cfg, std::size_t ai,
                          std::size_t ni, std::int64_t sample_id) {
  return mix_seed(cfg.master_seed, static_cast<std::uint64_t>(ai),
                  static_cast<std::uint64_t>(ni),
                  static_cast<std::uint64_t>(sample_id));
}

namespace {

struct SampleSlot {
  std::optional<SampleRecord> record;
  bool unreachable = false;
  bool retried = false;
};

SampleSlot solve_one_sample(const ExperimentConfig& cfg, std::size_t ai,
                            std::size_t ni, std::int64_t sid) {
  const double alpha = cfg.alphas[ai];
  const std::int64_t n = cfg.ns[ni];
  const std::uint64_t seed = sample_seed(cfg, ai, ni, sid);

  SolverOptions opt;
  opt.alpha = alpha;
  opt.constraint = JumpConstraint::capped(cfg.jump_cap);

  SampleSlot slot;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const double w = window_half_width(cfg, n) * (attempt == 0 ? 1.0 : 2.0);
    const Environment env =
        sample_environment(n, cfg.dim, WindowSpec{w, cfg.dim}, seed);
    const auto geo = geodesic_to_hyperplane(env, opt);
    if (!geo) {
      slot.unreachable = true;
      return slot;
    }
    const bool adequate =
        window_adequate(w, geo->path.steps, cfg.margin_fraction);
    if (!adequate && attempt == 0) {
      slot.retried = true;  // rerun once with the window doubled, same seed
      continue;
    }
    SampleRecord r;
    r.sample_id = sid;
    r.seed = seed;
    r.n = n;
    r.alpha = alpha;
    r.dim = cfg.dim;
    r.passage_time = geo->passage_time;
    r.max_jump = max_jump(*geo);
    r.max_displacement = max_displacement(*geo);
    r.boundary_hit = !adequate;
    slot.record = r;
    return slot;
  }
  return slot;  // unreachable in practice; the loop always returns
}

}  // namespace

CellOutcome run_cell(const ExperimentConfig& cfg, std::size_t ai,
                     std::size_t ni) {
  validate_config(cfg);
  const std::int64_t samples = cfg.samples;
  std::vector<SampleSlot> slots(static_cast<std::size_t>(samples));

  const int nthreads =
      static_cast<int>(std::min<std::int64_t>(cfg.threads, samples));
  std::atomic<std::int64_t> next{0};
  const auto worker = [&]() {
    for (;;) {
      const std::int64_t sid = next.fetch_add(1);
      if (sid >= samples) return;
      slots[static_cast<std::size_t>(sid)] = solve_one_sample(cfg, ai, ni, sid);
    }
  };
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  CellOutcome out;
  out.alpha_index = ai;
  out.n_index = ni;
  for (std::int64_t sid = 0; sid < samples; ++sid) {
    const SampleSlot& slot = slots[static_cast<std::size_t>(sid)];
    if (slot.retried) ++out.boundary_retries;
    if (slot.unreachable)
      out.unreachable.push_back(sid);
    else if (slot.record)
      out.records.push_back(*slot.record);
  }
  return out;
}

int run_simulate(const ExperimentConfig& cfg, std::ostream& log) {
  validate_config(cfg);
  if (cfg.output_dir.empty())
    throw std::invalid_argument("config: output directory required");

  const fs::path root(cfg.output_dir);
  fs::create_directories(root / "cells");

  json manifest;
  manifest["config"] = {
      {"alphas", cfg.alphas},
      {"ns", cfg.ns},
      {"samples", cfg.samples},
      {"master_seed", cfg.master_seed},
      {"dim", cfg.dim},
      {"window_factor", cfg.window_factor},
      {"window_exponent", cfg.window_exponent},
      {"margin_fraction", cfg.margin_fraction},
      {"jump_cap_finite", cfg.jump_cap < kInf},
      {"jump_cap", cfg.jump_cap < kInf ? json(cfg.jump_cap) : json(nullptr)},
  };
  json cells = json::array();

  bool any_failed = false;
  // summaries[ai][ni], present when the cell produced at least one record
  std::vector<std::vector<std::optional<BatchSummary>>> summaries(
      cfg.alphas.size(),
      std::vector<std::optional<BatchSummary>>(cfg.ns.size()));

  for (std::size_t ai = 0; ai < cfg.alphas.size(); ++ai) {
    for (std::size_t ni = 0; ni < cfg.ns.size(); ++ni) {
      const std::string stem = cell_stem(ai, ni);
      const fs::path csv_path = root / "cells" / (stem + ".csv");
      const fs::path sum_path = root / "cells" / (stem + ".summary.json");
      const fs::path done_path = root / "cells" / (stem + ".done");

      json cell;
      cell["alpha_index"] = ai;
      cell["n_index"] = ni;
      cell["alpha"] = cfg.alphas[ai];
      cell["n"] = cfg.ns[ni];
      cell["csv"] = "cells/" + stem + ".csv";
      cell["summary"] = "cells/" + stem + ".summary.json";

      try {
        std::vector<SampleRecord> records;
        std::vector<std::int64_t> unreachable;
        std::int64_t retries = 0;

        if (fs::exists(done_path) && fs::exists(csv_path)) {
          std::ifstream in(csv_path, std::ios::binary);
          records = read_records_csv(in);
          std::ifstream din(done_path, std::ios::binary);
          json done = json::parse(din);
          unreachable = done.at("unreachable").get<std::vector<std::int64_t>>();
          retries = done.at("boundary_retries").get<std::int64_t>();
          log << "cell " << stem << ": resumed from disk (" << records.size()
              << " records)\n";
        } else {
          const auto start = std::chrono::steady_clock::now();
          CellOutcome outcome = run_cell(cfg, ai, ni);
          records = std::move(outcome.records);
          unreachable = std::move(outcome.unreachable);
          retries = outcome.boundary_retries;
          const double secs =
              std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                            start)
                  .count();
          log << "cell " << stem << ": alpha=" << cfg.alphas[ai]
              << " n=" << cfg.ns[ni] << " computed in " << secs << "s\n";
        }

        write_file(csv_path, write_records_csv(records));
        std::optional<BatchSummary> summary;
        bool all_hits = true;
        for (const SampleRecord& r : records)
          if (!r.boundary_hit) all_hits = false;
        if (!records.empty() && !all_hits) summary = summarize(records);
        if (summary) write_file(sum_path, summary_to_json(*summary) + "\n");
        json done;
        done["samples"] = cfg.samples;
        done["unreachable"] = unreachable;
        done["boundary_retries"] = retries;
        write_file(done_path, done.dump() + "\n");

        summaries[ai][ni] = summary;
        cell["status"] = summary ? "ok" : "empty";
        cell["samples"] = cfg.samples;
        cell["unreachable"] = unreachable;
        cell["boundary_retries"] = retries;
      } catch (const std::exception& e) {
        any_failed = true;
        cell["status"] = "failed";
        cell["error"] = e.what();
        log << "cell " << stem << ": FAILED: " << e.what() << "\n";
      }
      cells.push_back(std::move(cell));
    }
  }
  manifest["cells"] = std::move(cells);

  // Per-alpha log-log fits across the n grid.
  json fit_files = json::array();
  for (std::size_t ai = 0; ai < cfg.alphas.size(); ++ai) {
    std::vector<std::pair<double, double>> mj, md, var;
    for (std::size_t ni = 0; ni < cfg.ns.size(); ++ni) {
      if (!summaries[ai][ni]) continue;
      const BatchSummary& s = *summaries[ai][ni];
      const double n = static_cast<double>(s.n);
      if (s.mean_max_jump > 0.0) mj.emplace_back(n, s.mean_max_jump);
      if (s.mean_max_displacement > 0.0) md.emplace_back(n, s.mean_max_displacement);
      if (s.var_passage_time > 0.0) var.emplace_back(n, s.var_passage_time);
    }
    json jf;
    jf["alpha"] = cfg.alphas[ai];
    jf["d"] = cfg.dim;
    const auto emit = [&](const char* key,
                          const std::vector<std::pair<double, double>>& pts) {
      if (pts.size() >= 2)
        jf[key] = json::parse(fit_to_json(fit_exponent(pts)));
      else
        jf[key] = nullptr;
    };
    emit("max_jump", mj);
    emit("max_displacement", md);
    emit("var_passage_time", var);
    const std::string name = "exponents_a" + std::to_string(ai) + ".json";
    write_file(root / name, jf.dump(2) + "\n");
    fit_files.push_back(name);
  }
  manifest["exponents"] = std::move(fit_files);

  write_file(root / "manifest.json", manifest.dump(2) + "\n");
  return any_failed ? 4 : 0;
}

}  // namespace fpp
