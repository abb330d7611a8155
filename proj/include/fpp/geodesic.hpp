#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fpp/environment.hpp"
#include "fpp/geometry.hpp"

namespace fpp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Optional upper bound on the Euclidean length of every jump of a path.
struct JumpConstraint {
  double cap = kInf;

  static JumpConstraint unbounded() { return {}; }
  static JumpConstraint capped(double c) { return {c}; }
  bool bounded() const { return cap < kInf; }
};

// A time-increasing path: positions at times start_time+1 .. start_time+len,
// departing from `start` at time start_time.
struct GeodesicPath {
  std::int64_t start_time = 0;
  SpacePoint start;
  std::vector<SpacePoint> steps;
  double alpha = 1.0;
};

struct GeodesicResult {
  GeodesicPath path;
  double passage_time = 0.0;
  std::vector<double> jumps;  // jumps[i] = distance covered entering steps[i]
};

// Sum over steps of (jump length)^alpha, accumulated front to back so that
// independent recomputations agree bit-for-bit.  Throws on empty/inconsistent
// paths or non-positive alpha.
double passage_time(const GeodesicPath& path);

// Transition evaluation strategies for the layer-by-layer value recursion.
// All of them compute the exact minimum; they differ only in running time
// and in which structural preconditions they need.
//
//  Plain    - full scan of every (predecessor, target) pair.  Reference.
//  Pruned   - scans predecessors in ascending accumulated value and stops as
//             soon as the accumulated value alone reaches the current best;
//             pairs are never skipped on any other basis (except jumps longer
//             than the cap).  Exact for every alpha, dimension and cap.
//  Monotone - divide-and-conquer over leftmost row minima.  Requires the
//             total-monotonicity precondition, which holds structurally for
//             d = 1, convex jump cost (alpha >= 1), no cap.  Falls back to
//             Pruned whenever the precondition fails.
//  Envelope - two-sided concave lower-envelope sweep.  Requires d = 1,
//             strictly concave jump cost (alpha < 1), no cap; falls back to
//             Pruned otherwise.
//  Auto     - Monotone or Envelope (by alpha) on large uncapped d = 1
//             transitions, Pruned everywhere else.
enum class DpKernel { Auto, Plain, Pruned, Monotone, Envelope };

struct SolverOptions {
  double alpha = 1.0;
  JumpConstraint constraint{};
  DpKernel kernel = DpKernel::Auto;
};

// Full value/predecessor tables of the layered recursion, for callers that
// need more than the optimal path (diagnostics, slab scans, prefix checks).
// value[i][j] is the optimal passage time from the start point to point j of
// layer first_layer + i; kInf marks unreachable points; pred -1 marks "no
// predecessor" (first layer or unreachable).
struct DpTables {
  std::int64_t first_layer = 1;
  std::vector<std::vector<double>> value;
  std::vector<std::vector<std::int32_t>> pred;
};

DpTables solve_layered(const Environment& env, const SpacePoint& start,
                       std::int64_t first_layer, std::int64_t last_layer,
                       const SolverOptions& opt);

// Optimal path from the origin at time 0 to the hyperplane at time n (any
// endpoint in the last layer).  Returns std::nullopt when no path satisfies
// the jump constraint.  Exact ties between optimal paths are broken towards
// the lexicographically smallest index sequence over the canonical
// (coordinate-sorted) layer order.
std::optional<GeodesicResult> geodesic_to_hyperplane(const Environment& env,
                                                     const SolverOptions& opt);

// Optimal path from v at time tv to w at time tw.  v must be the origin
// (tv = 0) or a point of layer tv.  With free_terminal the endpoint w is an
// arbitrary location whose final hop is paid like any other jump; otherwise
// w must be a point of layer tw.  Same tie rule as above.
std::optional<GeodesicResult> geodesic_point_to_point(
    const Environment& env, std::int64_t tv, const SpacePoint& v,
    std::int64_t tw, const SpacePoint& w, bool free_terminal,
    const SolverOptions& opt);

// Exhaustive reference solvers.  They enumerate every index sequence in
// lexicographic order, keep the first strictly best path, and share the
// jump-cost and summation order of the recursion solvers, so agreement is
// exact (bit-for-bit), not approximate.  Throws std::length_error when the
// instance has more than max_paths candidate paths.
std::optional<GeodesicResult> brute_force_geodesic(const Environment& env,
                                                   const SolverOptions& opt,
                                                   double max_paths = 1e7);
std::optional<GeodesicResult> brute_force_point_to_point(
    const Environment& env, std::int64_t tv, const SpacePoint& v,
    std::int64_t tw, const SpacePoint& w, bool free_terminal,
    const SolverOptions& opt, double max_paths = 1e7);

// Structural applicability of the fast d = 1 kernels.
bool monotone_fast_path_applicable(int dim, double alpha, const JumpConstraint& c);
bool envelope_fast_path_applicable(int dim, double alpha, const JumpConstraint& c);

// Numeric check of the convexity-based total-monotonicity precondition for
// one transition: verifies the quadrangle inequality
//   cost(i, j) + cost(i+1, j+1) <= cost(i, j+1) + cost(i+1, j)
// on all adjacent quadruples of sorted coordinates (accumulated predecessor
// values cancel from both sides, so only geometry enters).
bool monge_precondition_holds(const std::vector<double>& prev_x,
                              const std::vector<double>& cur_x, double alpha);

// JSON-lines dump of a solved path: one header object
//   {"alpha":..., "n":..., "seed":..., "T_n":..., "max_jump":...}
// then one line {"k":..., "x":[...], "jump":...} per step.
struct GeodesicDump {
  double alpha = 1.0;
  std::int64_t n = 0;
  std::uint64_t seed = 0;
  double total = 0.0;
  double max_jump = 0.0;
  GeodesicResult result;
};

void serialize_geodesic(const GeodesicResult& result, std::int64_t n,
                        std::uint64_t seed, std::ostream& out);
GeodesicDump parse_geodesic(std::istream& in);
GeodesicDump parse_geodesic(const std::string& text);

}  // namespace fpp
