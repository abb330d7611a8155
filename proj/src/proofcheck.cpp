#include "fpp/proofcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "fpp/rng.hpp"

namespace fpp {
namespace {

using nlohmann::json;

// Ceiling with a small slack: scales that are integers up to floating-point
// rounding of log/pow keep their integer value.
int slack_ceil(double x) { return static_cast<int>(std::ceil(x - 1e-6)); }

double inf_norm(const SpacePoint& p) {
  double m = 0.0;
  for (double c : p) m = std::max(m, std::fabs(c));
  return m;
}

// Lattice points within Euclidean distance r of v, nearest first (ties by
// lexicographic order, so enumeration is deterministic).
std::vector<SpacePoint> lattice_in_ball(const SpacePoint& v, double r) {
  const int d = static_cast<int>(v.size());
  std::vector<SpacePoint> out;
  SpacePoint w(v.size());
  const std::function<void(int)> rec = [&](int axis) {
    if (axis == d) {
      if (euclidean_distance(w, v) <= r) out.push_back(w);
      return;
    }
    const long lo = static_cast<long>(std::ceil(v[axis] - r));
    const long hi = static_cast<long>(std::floor(v[axis] + r));
    for (long c = lo; c <= hi; ++c) {
      w[axis] = static_cast<double>(c);
      rec(axis + 1);
    }
  };
  rec(0);
  std::sort(out.begin(), out.end(), [&](const SpacePoint& a, const SpacePoint& b) {
    const double da = euclidean_distance(a, v), db = euclidean_distance(b, v);
    if (da != db) return da < db;
    return a < b;
  });
  return out;
}

void validate_face(const FaceSpec& f) {
  const int d = static_cast<int>(f.center.size());
  if (d < 1 || d > 4)
    throw std::invalid_argument("is_black: dimension must be in [1, 4]");
  if (!(f.alpha > 0.0) || f.alpha == 1.0)
    throw std::invalid_argument("is_black: alpha must be positive and != 1");
  if (!(f.grid_step > 0.0) || f.grid_step > 0.5)
    throw std::invalid_argument("is_black: grid_step must be in (0, 0.5]");
  if (!(f.c1 > 0.0)) throw std::invalid_argument("is_black: c1 must be positive");
  if (!(f.ell > 0.0)) throw std::invalid_argument("is_black: ell must be positive");
  if (f.length < 1) throw std::invalid_argument("is_black: length must be >= 1");
  if (f.block < 0) throw std::invalid_argument("is_black: block must be >= 0");
  if (f.alpha > 1.0 && !(f.big_m > 0.0))
    throw std::invalid_argument("is_black: M must be positive");
}

// Rigor margin for alpha < 1: a continuum start within h of its grid vertex
// changes the first-jump cost by at most h^alpha (t^alpha is Hoelder), and
// the covering radius of a grid with step h is at most h for d <= 4.
double margin_lt1(const FaceSpec& f) { return std::pow(f.grid_step, f.alpha); }

// Rigor margin for alpha > 1.  Moving the start v by delta <= h*d changes
//  - the passage time of any relevant path (one with T below the threshold,
//    hence first jump at most threshold^(1/alpha)) by at most
//    alpha * (jump + delta)^(alpha-1) * delta, and
//  - the w-dependent threshold ((|v-w|/ell)^alpha + c1) * ell by at most
//    alpha * (rmax/ell)^(alpha-1) * delta.
// Both Lipschitz bounds are evaluated at the largest relevant distance rmax.
double margin_gt1(const FaceSpec& f) {
  const int d = static_cast<int>(f.center.size());
  const double h = f.grid_step;
  const double delta = h * d;
  const double rmax = 2.0 * f.big_m * f.ell + 2.0 + 2.0 * h;
  const double th_max = (std::pow(rmax / f.ell, f.alpha) + f.c1) * f.ell;
  const double jump_bound = std::pow(th_max, 1.0 / f.alpha) + delta;
  return f.alpha *
         (std::pow(jump_bound, f.alpha - 1.0) +
          std::pow(rmax / f.ell, f.alpha - 1.0)) *
         delta;
}

// Best passage time from the solved tables to the terminal w (final hop paid
// like any other jump).  Empty interiors give +inf: no admissible path.
double final_hop_min(const Environment& env, const DpTables& t,
                     const SpacePoint& w, double alpha) {
  const Layer& last =
      env.layer(t.first_layer + static_cast<std::int64_t>(t.value.size()) - 1);
  const std::vector<double>& val = t.value.back();
  double best = kInf;
  for (std::size_t z = 0; z < val.size(); ++z) {
    if (val[z] >= kInf) continue;
    const double cand =
        val[z] + jump_cost(euclidean_distance(last.point(z), w.data(), env.dim),
                           alpha);
    best = std::min(best, cand);
  }
  return best;
}

// Enumerates the start grid of the face: per axis, center - 2 + i * h for
// i = 0..ceil(4/h), slightly overshooting +2 so the cell is fully covered.
std::vector<SpacePoint> face_grid(const FaceSpec& f) {
  const int d = static_cast<int>(f.center.size());
  const int steps = static_cast<int>(std::ceil(4.0 / f.grid_step - 1e-9));
  std::vector<SpacePoint> grid;
  SpacePoint v(f.center.size());
  const std::function<void(int)> rec = [&](int axis) {
    if (axis == d) {
      grid.push_back(v);
      return;
    }
    for (int i = 0; i <= steps; ++i) {
      v[axis] = f.center[axis] - 2.0 + i * f.grid_step;
      rec(axis + 1);
    }
  };
  rec(0);
  return grid;
}

}  // namespace

FaceSpec make_face_spec(double n_scale, double beta, std::int64_t block,
                        SpacePoint center, double c1, double big_m,
                        double alpha, double grid_step) {
  if (!(n_scale > 1.0))
    throw std::invalid_argument("make_face_spec: n must exceed 1");
  FaceSpec f;
  f.ell = std::pow(std::log(n_scale), beta);
  f.length = slack_ceil(f.ell);
  f.block = block;
  f.center = std::move(center);
  f.c1 = c1;
  f.big_m = big_m;
  f.alpha = alpha;
  f.grid_step = grid_step;
  f.n_scale = n_scale;
  f.beta = beta;
  return f;
}

bool is_black(const Environment& env, const FaceSpec& face) {
  validate_face(face);
  const int d = static_cast<int>(face.center.size());
  if (env.dim != d)
    throw std::invalid_argument("is_black: environment dimension mismatch");

  const int L = face.length;
  const std::int64_t t0 = face.block * L;  // time of the start cell
  if (L >= 2 && t0 + L - 1 > env.n)
    throw std::invalid_argument("is_black: environment too short for block");

  const bool concave = face.alpha < 1.0;
  const double margin = concave ? margin_lt1(face) : margin_gt1(face);
  const double thresh_lt1 = face.c1 * face.ell;
  const double rlim_lt1 = std::pow(thresh_lt1 + margin, 1.0 / face.alpha);

  SolverOptions opt;
  opt.alpha = face.alpha;
  opt.kernel = DpKernel::Pruned;

  for (const SpacePoint& v : face_grid(face)) {
    DpTables tables;
    const bool has_interior = L >= 2;
    if (has_interior) tables = solve_layered(env, v, t0 + 1, t0 + L - 1, opt);
    const auto hop = [&](const SpacePoint& w) {
      if (!has_interior) return jump_cost(euclidean_distance(v, w), face.alpha);
      return final_hop_min(env, tables, w, face.alpha);
    };

    if (concave) {
      for (const SpacePoint& w : lattice_in_ball(v, rlim_lt1))
        if (hop(w) < thresh_lt1 + margin) return false;
    } else {
      for (const SpacePoint& w : lattice_in_ball(face.center, 2.0 * face.big_m * face.ell)) {
        const double th =
            (std::pow(euclidean_distance(v, w) / face.ell, face.alpha) + face.c1) *
            face.ell;
        if (hop(w) < th + margin) return false;
      }
    }
  }
  return true;
}

BlackProbability estimate_black_probability(const FaceSpec& face,
                                            std::int64_t trials,
                                            std::uint64_t seed) {
  validate_face(face);
  if (trials <= 0)
    throw std::invalid_argument("estimate_black_probability: trials must be positive");

  FaceSpec f0 = face;
  f0.block = 0;
  const int d = static_cast<int>(face.center.size());
  const int L = face.length;
  const double h = face.grid_step;

  // Window sized so any path through an excluded point is provably above the
  // decision threshold: for alpha < 1 a detour of length s costs at least
  // s^alpha; for alpha > 1 a path of L jumps and total length s costs at
  // least L * (s/L)^alpha.
  double reach;
  if (face.alpha < 1.0) {
    reach = 2.0 * std::pow(face.c1 * face.ell + margin_lt1(f0), 1.0 / face.alpha);
  } else {
    const double rmax = 2.0 * face.big_m * face.ell + 2.0 + 2.0 * h;
    const double th_max =
        (std::pow(rmax / face.ell, face.alpha) + face.c1) * face.ell + margin_gt1(f0);
    const double wander = L * std::pow(th_max / L, 1.0 / face.alpha);
    reach = std::max(2.0 * face.big_m * face.ell, wander);
  }
  const double w_slab = inf_norm(face.center) + 2.0 + h + reach + 1.0;

  std::int64_t black = 0;
  for (std::int64_t t = 0; t < trials; ++t) {
    const std::uint64_t tseed = mix_seed(seed, static_cast<std::uint64_t>(t));
    Environment env;
    if (L >= 2) {
      env = sample_environment(L - 1, d, WindowSpec{w_slab, d}, tseed);
    } else {
      env.n = 1;  // no interior layers: blackness is deterministic
      env.dim = d;
      env.half_width = w_slab;
      env.layers.resize(1);
      env.layers[0].time = 1;
      env.layers[0].dim = d;
    }
    if (is_black(env, f0)) ++black;
  }

  BlackProbability p;
  p.trials = trials;
  p.estimate = static_cast<double>(black) / static_cast<double>(trials);
  p.stderr_ = std::sqrt(p.estimate * (1.0 - p.estimate) /
                        static_cast<double>(trials));
  return p;
}

std::string black_report_json(const FaceSpec& face, const BlackProbability& p) {
  json j;
  j["c1"] = face.c1;
  j["beta"] = face.beta;
  j["alpha"] = face.alpha;
  j["L"] = face.length;
  j["trials"] = p.trials;
  j["estimate"] = p.estimate;
  j["stderr"] = p.stderr_;
  return j.dump();
}

// ---------------------------------------------------------------------------
// Tunneling tubes
// ---------------------------------------------------------------------------

namespace {

void validate_tube(const TubeSpec& s) {
  const std::size_t d = s.anchor.size();
  if (d == 0 || s.drift.size() != d)
    throw std::invalid_argument("tube: anchor/drift dimension mismatch");
  if (s.length < 2) throw std::invalid_argument("tube: length must be >= 2");
  if (!(s.narrow_radius > 0.0) || !(s.wide_radius > s.narrow_radius))
    throw std::invalid_argument("tube: need 0 < narrow_radius < wide_radius");
  if (!(s.gap >= 2.0 * s.narrow_radius))
    throw std::invalid_argument("tube: gap must be at least 2 * narrow_radius");
  if (!(s.alpha > 0.0)) throw std::invalid_argument("tube: alpha must be positive");
  if (s.alpha < 1.0)
    for (double c : s.drift)
      if (c != 0.0)
        throw std::invalid_argument("tube: drift must be zero for alpha < 1");
}

// Ball center of interior layer l: the corridor point plus, at the single
// middle layer, the sideways detour of 1.5 * gap along the first axis.
SpacePoint tube_center(const TubeSpec& s, int l) {
  SpacePoint c(s.anchor.size());
  for (std::size_t i = 0; i < c.size(); ++i)
    c[i] = s.anchor[i] + static_cast<double>(l) * s.drift[i];
  if (l == s.length / 2) c[0] += 1.5 * s.gap;
  return c;
}

SpacePoint corridor_point(const TubeSpec& s, int l) {
  SpacePoint c(s.anchor.size());
  for (std::size_t i = 0; i < c.size(); ++i)
    c[i] = s.anchor[i] + static_cast<double>(l) * s.drift[i];
  return c;
}

}  // namespace

TubeSpec make_tube_spec(double n_scale, double beta, double epsilon, double c1,
                        double alpha, SpacePoint anchor,
                        std::int64_t anchor_time, SpacePoint drift) {
  if (!(n_scale > 1.0))
    throw std::invalid_argument("make_tube_spec: n must exceed 1");
  if (!(c1 > 0.0) || c1 > 1.0)
    throw std::invalid_argument("make_tube_spec: c1 must be in (0, 1]");
  const double logn = std::log(n_scale);
  TubeSpec s;
  s.anchor = std::move(anchor);
  s.anchor_time = anchor_time;
  s.drift = std::move(drift);
  s.length = slack_ceil(std::pow(logn, beta));
  s.gap = std::pow(logn, epsilon);
  s.narrow_radius = std::pow(c1, 2.0 / std::min(alpha, 1.0));
  s.wide_radius = std::pow(logn, 2.0 * beta);
  s.alpha = alpha;
  validate_tube(s);
  return s;
}

std::vector<Layer> build_tunneling_tube(const TubeSpec& spec,
                                        std::uint64_t seed) {
  validate_tube(spec);
  const int d = static_cast<int>(spec.anchor.size());
  std::vector<Layer> layers(static_cast<std::size_t>(spec.length) + 1);
  for (int l = 0; l <= spec.length; ++l) {
    Layer& layer = layers[static_cast<std::size_t>(l)];
    layer.time = spec.anchor_time + l;
    layer.dim = d;
    SpacePoint p;
    if (l == 0 || l == spec.length) {
      p = corridor_point(spec, l);  // endpoints sit exactly on the corridor
    } else {
      RandomStream rs(mix_seed(seed, static_cast<std::uint64_t>(l)));
      p = rs.next_in_ball(tube_center(spec, l), spec.narrow_radius);
    }
    layer.coords.assign(p.begin(), p.end());
  }
  return layers;
}

bool is_tunneling(const std::vector<Layer>& layers, const TubeSpec& spec) {
  validate_tube(spec);
  const int d = static_cast<int>(spec.anchor.size());

  for (int l = 0; l <= spec.length; ++l) {
    const std::int64_t t = spec.anchor_time + l;
    const Layer* layer = nullptr;
    for (const Layer& cand : layers)
      if (cand.time == t) {
        layer = &cand;
        break;
      }
    const std::size_t count = layer ? layer->count() : 0;
    if (layer && layer->dim != d) return false;

    const SpacePoint center = tube_center(spec, l);
    const SpacePoint corridor = corridor_point(spec, l);

    if (l == 0 || l == spec.length) {
      // Endpoint layer: the exact corridor point must be present, and nothing
      // else may intrude into the wide tube.
      bool found = false;
      for (std::size_t i = 0; i < count; ++i) {
        const SpacePoint p = layer->point_vec(i);
        if (p == corridor) {
          found = true;
          continue;
        }
        if (euclidean_distance(p, corridor) <= spec.wide_radius) return false;
      }
      if (!found) return false;
      continue;
    }

    // Interior layer: exactly one point in the closed narrow ball, nothing
    // else within the wide tube around the (undrifted) corridor line.
    std::size_t narrow_idx = count;
    for (std::size_t i = 0; i < count; ++i) {
      if (euclidean_distance(layer->point(i), center.data(), d) <=
          spec.narrow_radius) {
        if (narrow_idx != count) return false;  // second point in the ball
        narrow_idx = i;
      }
    }
    if (narrow_idx == count) return false;
    for (std::size_t i = 0; i < count; ++i) {
      if (i == narrow_idx) continue;
      if (euclidean_distance(layer->point(i), corridor.data(), d) <=
          spec.wide_radius)
        return false;
    }
  }
  return true;
}

Environment tube_environment(const std::vector<Layer>& tube,
                             const TubeSpec& spec) {
  if (spec.anchor_time != 0)
    throw std::invalid_argument("tube_environment: tube must start at time 0");
  for (double c : spec.anchor)
    if (c != 0.0)
      throw std::invalid_argument("tube_environment: anchor must be the origin");

  std::vector<std::vector<SpacePoint>> by_layer(
      static_cast<std::size_t>(spec.length));
  for (const Layer& layer : tube) {
    if (layer.time == 0) continue;  // the anchor is the implicit start
    if (layer.time < 1 || layer.time > spec.length)
      throw std::invalid_argument("tube_environment: layer time out of range");
    for (std::size_t i = 0; i < layer.count(); ++i)
      by_layer[static_cast<std::size_t>(layer.time - 1)].push_back(
          layer.point_vec(i));
  }
  return deterministic_environment(by_layer);
}

double tube_jump_cap(const TubeSpec& spec) {
  return 1.5 * spec.gap + euclidean_norm(spec.drift) +
         2.0 * spec.narrow_radius + 1e-9;
}

double max_interior_jump(const GeodesicResult& result) {
  double m = 0.0;
  for (std::size_t i = 1; i + 1 < result.jumps.size(); ++i)
    m = std::max(m, result.jumps[i]);
  return m;
}

}  // namespace fpp
