// End-to-end checks of the fpplab binary.  The binary path arrives as the
// first non-doctest command-line argument (wired up in CMakeLists).
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "fpp/environment.hpp"
#include "fpp/experiment.hpp"
#include "fpp/geodesic.hpp"
#include "fpp/proofcheck.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string g_binary;

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    path = fs::temp_directory_path() /
           ("fpplab_cli_" + tag + "_" + std::to_string(rng()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

// Runs `prefix binary args`, returns the exit code; stdout goes to out_file.
int run_cli(const std::string& args, const fs::path& out_file,
            const std::string& env_prefix = "") {
  std::string cmd = env_prefix + " \"" + g_binary + "\" " + args + " > \"" +
                    out_file.string() + "\" 2> \"" + out_file.string() +
                    ".err\"";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("help succeeds and bad invocations exit with code 2") {
  TempDir dir("basic");
  CHECK(run_cli("--help", dir.path / "help.txt") == 0);
  CHECK(slurp(dir.path / "help.txt").find("simulate") != std::string::npos);
  CHECK(run_cli("", dir.path / "none.txt") == 2);          // subcommand required
  CHECK(run_cli("dump --alpha 1", dir.path / "miss.txt") == 2);  // --n missing
  CHECK(run_cli("frobnicate", dir.path / "unk.txt") == 2);
  CHECK(run_cli("dump --alpha 1 --n 8 --no-such-flag", dir.path / "flag.txt") == 2);
}

TEST_CASE("dump writes the same path the library computes") {
  TempDir dir("dump");
  const fs::path out = dir.path / "geo.jsonl";
  const int rc = run_cli(
      "dump --alpha 0.8 --n 12 --seed 3 --out \"" + out.string() + "\"",
      dir.path / "stdout.txt");
  REQUIRE(rc == 0);

  // Recompute with identical parameters through the library.
  fpp::ExperimentConfig wcfg;
  const double w = fpp::window_half_width(wcfg, 12);
  const auto env = fpp::sample_environment(12, 1, fpp::WindowSpec{w, 1}, 3);
  fpp::SolverOptions opt;
  opt.alpha = 0.8;
  const auto geo = fpp::geodesic_to_hyperplane(env, opt);
  REQUIRE(geo.has_value());
  std::ostringstream expect;
  fpp::serialize_geodesic(*geo, 12, 3, expect);
  CHECK(slurp(out) == expect.str());

  // Stdout variant emits the same bytes.
  const int rc2 = run_cli("dump --alpha 0.8 --n 12 --seed 3 --out -",
                          dir.path / "stdout2.txt");
  REQUIRE(rc2 == 0);
  CHECK(slurp(dir.path / "stdout2.txt") == expect.str());

  // Impossible cap: no admissible path, exit 3.
  CHECK(run_cli("dump --alpha 0.8 --n 12 --seed 3 --jump-cap 0.01 --out -",
                dir.path / "cap.txt") == 3);
}

TEST_CASE("simulate runs a grid, honors env overrides, stays byte-stable") {
  TempDir dir("sim");
  const fs::path out_a = dir.path / "a";
  const fs::path out_b = dir.path / "b";

  const std::string grid =
      "simulate --alpha 0.7 1.3 --n 4 8 --samples 6 --seed 21 --threads 1";
  REQUIRE(run_cli(grid + " --out \"" + out_a.string() + "\"",
                  dir.path / "runa.txt") == 0);
  CHECK(fs::exists(out_a / "manifest.json"));
  CHECK(fs::exists(out_a / "cells/a1_n1.csv"));

  // Same grid via environment overrides for output dir and thread count.
  REQUIRE(run_cli(grid, dir.path / "runb.txt",
                  "FPPLAB_OUTPUT_DIR=\"" + out_b.string() +
                      "\" FPPLAB_THREADS=4") == 0);
  for (const char* rel :
       {"manifest.json", "exponents_a0.json", "cells/a0_n0.csv",
        "cells/a0_n0.summary.json", "cells/a1_n1.summary.json"}) {
    CAPTURE(rel);
    REQUIRE(fs::exists(out_b / rel));
    CHECK(slurp(out_a / rel) == slurp(out_b / rel));
  }

  // Missing output directory is a configuration error.
  CHECK(run_cli("simulate --alpha 0.7 --n 4", dir.path / "noout.txt") == 2);
  // So is a bad grid.
  CHECK(run_cli("simulate --alpha 0.7 --n 8 4 --out \"" + out_a.string() + "\"",
                dir.path / "badgrid.txt") == 2);
}

TEST_CASE("simulate reads config files") {
  TempDir dir("cfg");
  const fs::path ini = dir.path / "run.ini";
  const fs::path out = dir.path / "out";
  {
    std::ofstream f(ini);
    f << "[simulate]\n"
      << "alpha=[0.9, 1.1]\n"
      << "n=[4, 8]\n"
      << "samples=5\n"
      << "seed=13\n"
      << "out=\"" << out.string() << "\"\n";
  }
  REQUIRE(run_cli("--config \"" + ini.string() + "\" simulate",
                  dir.path / "run.txt") == 0);
  const json manifest = json::parse(slurp(out / "manifest.json"));
  CHECK(manifest.at("config").at("samples") == 5);
  CHECK(manifest.at("config").at("master_seed") == 13);
  CHECK(manifest.at("cells").size() == 4);
}

TEST_CASE("blackface reports the library's Monte Carlo estimate") {
  TempDir dir("bf");
  const int rc = run_cli(
      "blackface --alpha 0.5 --c1 0.01 --ell 2 --trials 40 --seed 9",
      dir.path / "report.json");
  REQUIRE(rc == 0);
  const json rep = json::parse(slurp(dir.path / "report.json"));
  CHECK(rep.at("L") == 2);
  CHECK(rep.at("trials") == 40);

  fpp::FaceSpec face;
  face.center = {0.0};
  face.ell = 2.0;
  face.length = 2;
  face.c1 = 0.01;
  face.big_m = 2.0;
  face.alpha = 0.5;
  face.grid_step = 0.25;
  const auto p = fpp::estimate_black_probability(face, 40, 9);
  CHECK(rep.at("estimate") == p.estimate);

  CHECK(run_cli("blackface --alpha 0.5 --c1 0.01", dir.path / "noscale.txt") == 2);
}

TEST_CASE("tunnel verifies the forced-jump bracket end to end") {
  TempDir dir("tun");
  const fs::path envfile = dir.path / "tube.jsonl";
  const int rc = run_cli(
      "tunnel --length 6 --gap 4 --seed 11 --out \"" + envfile.string() + "\"",
      dir.path / "report.json");
  REQUIRE(rc == 0);
  const json rep = json::parse(slurp(dir.path / "report.json"));
  CHECK(rep.at("is_tunneling") == true);
  CHECK(rep.at("within_bracket") == true);
  CHECK(rep.at("forced_jump_center") == 6.0);
  const double mij = rep.at("max_interior_jump").get<double>();
  CHECK(mij >= rep.at("forced_jump_bracket").at(0).get<double>() - 1e-9);
  CHECK(mij <= rep.at("forced_jump_bracket").at(1).get<double>() + 1e-9);

  std::ifstream envin(envfile, std::ios::binary);
  const fpp::Environment env = fpp::parse_environment(envin);
  CHECK(env.n == 6);
  CHECK(env.dim == 1);

  // Geometrically impossible corridor: configuration error.
  CHECK(run_cli("tunnel --length 6 --gap 0.1", dir.path / "bad.txt") == 2);
}

int main(int argc, char** argv) {
  doctest::Context context;
  // Peel off the binary path (first plain argument after the program name).
  if (argc > 1 && argv[1][0] != '-') {
    g_binary = argv[1];
    context.applyCommandLine(argc - 1, argv + 1);
  } else {
    context.applyCommandLine(argc, argv);
  }
  if (g_binary.empty()) {
    std::fprintf(stderr, "usage: test_cli <path-to-fpplab> [doctest args]\n");
    return 1;
  }
  return context.run();
}
