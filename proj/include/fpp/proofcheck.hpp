#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fpp/environment.hpp"
#include "fpp/geodesic.hpp"

namespace fpp {

// One space-time face of the renormalization slab decomposition: block index
// k on the time axis (layers k*L+1 .. (k+1)*L), spatial cell of side 4
// centered at a lattice vertex.
//
// A face is "black" when every start point v in the cell (time k*L) is
// expensive to traverse: for alpha < 1 the best passage time from v to any
// lattice vertex w on the far hyperplane is at least c1 * ell; for alpha > 1
// it is at least ((|v - w| / ell)^alpha + c1) * ell for every lattice w
// within distance 2*M*ell of the cell center.
struct FaceSpec {
  std::int64_t block = 0;
  SpacePoint center;
  double ell = 1.0;      // slab scale; length = ceil(ell) for factory specs
  int length = 1;        // L: layers per block
  double c1 = 0.1;
  double big_m = 2.0;    // M: lattice search radius multiplier (alpha > 1)
  double alpha = 0.5;
  double grid_step = 0.25;  // h: start-point grid resolution, h <= 0.5
  // metadata recorded by the factory; 0 when ell was given directly
  double n_scale = 0.0;
  double beta = 0.0;
};

// Derives ell = (log n)^beta and L = ceil(ell).  The ceiling is taken with a
// 1e-6 slack so that scales which are integers up to log/pow rounding
// (e.g. ell = 2 + 1e-8) keep their integer length.
FaceSpec make_face_spec(double n_scale, double beta, std::int64_t block,
                        SpacePoint center, double c1, double big_m,
                        double alpha, double grid_step);

// Decides blackness of a face against one environment realization.
//
// The continuum "for every v in the cell" quantifier is certified through a
// finite grid of step h plus a rigor margin added to the threshold, sized so
// that a passing grid check implies the inequality for every continuum v
// (one-sided soundness: `true` is reliable, `false` may be conservative).
// For alpha < 1 candidate lattice targets w are truncated to
// |v - w| <= (threshold + margin)^(1/alpha), sound because a path from v to w
// costs at least |v - w|^alpha (subadditivity of t^alpha).
//
// Requires 1 <= d <= 4 (margin calibration), alpha != 1, h in (0, 0.5], and
// an environment covering the interior layers of the block.
bool is_black(const Environment& env, const FaceSpec& face);

struct BlackProbability {
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::int64_t trials = 0;
};

// Monte Carlo frequency of blackness over independent Poisson slabs (block
// translated to 0; trial t uses the seed stream mix(seed, t)).  The slab
// window is sized so that any path through an excluded point is provably too
// expensive to affect the verdict.
BlackProbability estimate_black_probability(const FaceSpec& face,
                                            std::int64_t trials,
                                            std::uint64_t seed);

// Report with keys {c1, beta, alpha, L, trials, estimate, stderr}.
std::string black_report_json(const FaceSpec& face, const BlackProbability& p);

// A tunneling-tube configuration: a corridor of L layer steps from a spatial
// anchor, drifting by `drift` per layer.  Interior layer l carries exactly
// one point in the closed ball of radius narrow_radius around the corridor
// center, which for the single middle layer l = floor(L/2) is pushed
// sideways by 1.5 * gap along the first axis; no other point may lie within
// wide_radius of the undrifted corridor line.  Both endpoints sit exactly on
// the corridor.  Any path through such a tube is forced into one jump of
// size about 1.5 * gap.
struct TubeSpec {
  SpacePoint anchor;
  std::int64_t anchor_time = 0;
  SpacePoint drift;       // per-layer displacement; must be zero for alpha < 1
  int length = 4;         // L >= 2
  double gap = 4.0;
  double narrow_radius = 0.25;
  double wide_radius = 8.0;
  double alpha = 0.5;
};

// Scaling-form factory: gap = (log n)^epsilon, wide = (log n)^(2*beta),
// narrow = c1^(2 / min(alpha, 1)), L = ceil((log n)^beta) (same 1e-6 slack).
TubeSpec make_tube_spec(double n_scale, double beta, double epsilon, double c1,
                        double alpha, SpacePoint anchor,
                        std::int64_t anchor_time, SpacePoint drift);

// Samples a realization of the tube: layers anchor_time .. anchor_time + L,
// endpoints exact, one uniform point per interior narrow ball.  Throws
// std::invalid_argument on invalid geometry (gap < 2 * narrow_radius,
// narrow_radius >= wide_radius, L < 2, nonzero drift with alpha < 1).
std::vector<Layer> build_tunneling_tube(const TubeSpec& spec,
                                        std::uint64_t seed);

// Verifies the tube property for an explicit point set (layer times
// anchor_time .. anchor_time + L; missing layers count as empty).
bool is_tunneling(const std::vector<Layer>& layers, const TubeSpec& spec);

// Wraps a tube realization anchored at the origin of time 0 into an
// environment whose layers 1..L are the tube layers (the anchor itself is the
// implicit path start).
Environment tube_environment(const std::vector<Layer>& tube,
                             const TubeSpec& spec);

// Jump cap that keeps the forced detour affordable:
// 1.5 * gap + |drift| + 2 * narrow_radius, plus a 1e-9 slack absorbing
// coordinate rounding.
double tube_jump_cap(const TubeSpec& spec);

// Largest jump strictly between interior points of a solved path (first and
// last hops excluded); 0 when the path has no interior jump.
double max_interior_jump(const GeodesicResult& result);

}  // namespace fpp
