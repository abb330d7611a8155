#include "fpp/geodesic.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace fpp {
namespace {

using nlohmann::json;

// Fast kernels only pay off once layers carry enough points; below this the
// pruned scan wins and, more importantly, crafted tie fixtures stay on the
// kernel with the full lexicographic tie rule.
constexpr std::size_t kFastKernelMinPoints = 32;

// ---------------------------------------------------------------------------
// Jump-cost dispatch.
//
// Each kernel is instantiated per cost specialization so the innermost loops
// inline fabs/sqrt/multiply instead of calling std::pow.  The branches mirror
// jump_cost() exactly; solvers, oracles and passage_time() therefore produce
// bit-identical values for the same jump.
// ---------------------------------------------------------------------------

struct CostLinear {
  double operator()(double t) const { return t; }
};
struct CostSquare {
  double operator()(double t) const { return t * t; }
};
struct CostSqrt {
  double operator()(double t) const { return std::sqrt(t); }
};
struct CostPow {
  double alpha;
  double operator()(double t) const { return std::pow(t, alpha); }
};

template <class F>
void dispatch_cost(double alpha, F&& f) {
  if (alpha == 1.0)
    f(CostLinear{});
  else if (alpha == 2.0)
    f(CostSquare{});
  else if (alpha == 0.5)
    f(CostSqrt{});
  else
    f(CostPow{alpha});
}

// Prefers candidate predecessor `a` over incumbent `b` on exact value ties.
using TiePrefer = std::function<bool(std::int32_t a, std::int32_t b)>;

// ---------------------------------------------------------------------------
// Transition kernels.  All fill cval/cpred for the current layer from the
// predecessor layer (coordinates px/pval), minimizing
//     pval[j] + cost(|cx[i] - px[j]|)
// over j, restricted to jumps within the cap.
// ---------------------------------------------------------------------------

template <class Cost>
void kernel_plain(const double* px, std::size_t pn, const double* cx,
                  std::size_t cn, int dim, const std::vector<double>& pval,
                  double cap, Cost cost, const TiePrefer* tie,
                  std::vector<double>& cval, std::vector<std::int32_t>& cpred) {
  for (std::size_t i = 0; i < cn; ++i) {
    double best = kInf;
    std::int32_t bestj = -1;
    for (std::size_t j = 0; j < pn; ++j) {
      const double v = pval[j];
      if (v >= kInf) continue;
      const double dist = euclidean_distance(cx + i * dim, px + j * dim, dim);
      if (dist > cap) continue;
      const double cand = v + cost(dist);
      if (cand < best) {
        best = cand;
        bestj = static_cast<std::int32_t>(j);
      } else if (cand == best && bestj >= 0 && tie &&
                 (*tie)(static_cast<std::int32_t>(j), bestj)) {
        bestj = static_cast<std::int32_t>(j);
      }
    }
    cval[i] = best;
    cpred[i] = bestj;
  }
}

// Predecessors are visited in ascending accumulated value; once the
// accumulated value alone reaches the current best the scan stops, because
// every remaining candidate is at least that expensive (jump costs are
// nonnegative).  No pair is skipped on any other basis; jumps beyond the cap
// are the one admissible exception.
template <class Cost>
void kernel_pruned(const double* px, [[maybe_unused]] std::size_t pn,
                   const double* cx,
                   std::size_t cn, int dim, const std::vector<double>& pval,
                   const std::vector<std::int32_t>& value_order, double cap,
                   Cost cost, const TiePrefer* tie, std::vector<double>& cval,
                   std::vector<std::int32_t>& cpred) {
  for (std::size_t i = 0; i < cn; ++i) {
    double best = kInf;
    std::int32_t bestj = -1;
    for (std::int32_t j : value_order) {
      const double v = pval[static_cast<std::size_t>(j)];
      if (v >= best) break;  // every later candidate costs at least this much
      const double dist = euclidean_distance(cx + i * dim, px + j * dim, dim);
      if (dist > cap) continue;
      const double cand = v + cost(dist);
      if (cand < best) {
        best = cand;
        bestj = j;
      } else if (cand == best && bestj >= 0 && tie && (*tie)(j, bestj)) {
        bestj = j;
      }
    }
    cval[i] = best;
    cpred[i] = bestj;
  }
}

// Divide-and-conquer over leftmost row minima.  Valid when the transition
// matrix is totally monotone, which holds for d = 1 with convex jump cost and
// no cap.  Unreachable predecessors give +inf columns, uniform across rows,
// and cannot disturb monotonicity of the (finite) leftmost minima.
template <class Cost>
void kernel_monotone(const std::vector<double>& px,
                     const std::vector<double>& pval,
                     const std::vector<double>& cx, Cost cost,
                     std::vector<double>& cval,
                     std::vector<std::int32_t>& cpred) {
  const std::size_t pn = px.size();
  struct Frame {
    std::size_t rlo, rhi, clo, chi;
  };
  std::vector<Frame> stack;
  if (!cx.empty()) stack.push_back({0, cx.size() - 1, 0, pn - 1});
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    const std::size_t mid = f.rlo + (f.rhi - f.rlo) / 2;
    double best = kInf;
    std::size_t bestj = f.clo;
    for (std::size_t j = f.clo; j <= f.chi; ++j) {
      const double v = pval[j];
      if (v >= kInf) continue;
      const double cand = v + cost(std::fabs(cx[mid] - px[j]));
      if (cand < best) {
        best = cand;
        bestj = j;
      }
    }
    cval[mid] = best;
    cpred[mid] = best < kInf ? static_cast<std::int32_t>(bestj) : -1;
    if (mid > f.rlo) stack.push_back({f.rlo, mid - 1, f.clo, bestj});
    if (mid < f.rhi) stack.push_back({mid + 1, f.rhi, bestj, f.chi});
  }
}

// One-sided concave envelope sweep: minimizes pval[j] + cost(cx[i] - px[j])
// over predecessors with px[j] <= cx[i], both arrays ascending, cost strictly
// concave increasing.  Between two candidates the cost difference of the
// nearer one grows monotonically with the target coordinate, so each pair of
// candidates crosses at most once and the per-target winner follows a stack
// discipline: a new candidate either never wins, wins an initial interval, or
// retires stack entries whose remaining reign it covers entirely.
template <class Cost>
void envelope_one_sided(const std::vector<double>& px,
                        const std::vector<double>& pval,
                        const std::vector<double>& cx, Cost cost,
                        std::vector<double>& out_val,
                        std::vector<std::int32_t>& out_pred) {
  const std::size_t pn = px.size(), cn = cx.size();
  out_val.assign(cn, kInf);
  out_pred.assign(cn, -1);
  if (cn == 0 || pn == 0) return;

  struct Entry {
    std::int32_t j;
    std::size_t win_until;  // first target index where the entry below reigns
  };
  std::vector<Entry> stack;
  const auto eval = [&](std::int32_t j, std::size_t i) {
    return pval[static_cast<std::size_t>(j)] +
           cost(cx[i] - px[static_cast<std::size_t>(j)]);
  };

  std::size_t next_pred = 0;
  for (std::size_t i = 0; i < cn; ++i) {
    // Admit predecessors that became eligible at this target coordinate.
    for (; next_pred < pn && px[next_pred] <= cx[i]; ++next_pred) {
      if (pval[next_pred] >= kInf) continue;
      const std::int32_t j = static_cast<std::int32_t>(next_pred);
      while (!stack.empty()) {
        const Entry& t = stack.back();
        if (t.win_until <= i) {
          stack.pop_back();  // reign already over
          continue;
        }
        const std::size_t last = t.win_until - 1;
        if (eval(j, last) < eval(t.j, last)) {
          stack.pop_back();  // new candidate covers the entire remaining reign
          continue;
        }
        break;
      }
      if (stack.empty()) {
        stack.push_back({j, cn});
        continue;
      }
      // First target index in [i, top.win_until) where the top wins again.
      std::size_t lo = i, hi = stack.back().win_until;
      const std::int32_t topj = stack.back().j;
      while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (eval(j, mid) >= eval(topj, mid))
          hi = mid;
        else
          lo = mid + 1;
      }
      if (lo > i) stack.push_back({j, lo});
      // lo == i: the candidate never beats the current winner, and by the
      // crossing-once property it can never beat anything below it either.
    }
    while (!stack.empty() && stack.back().win_until <= i) stack.pop_back();
    if (!stack.empty()) {
      out_val[i] = eval(stack.back().j, i);
      out_pred[i] = stack.back().j;
    }
  }
}

// Two-sided concave kernel: left pass as is, right pass via reflection
// (negate and reverse both axes), then pointwise minimum.  The reflected
// subtraction (-a) - (-b) rounds identically to b - a, so costs agree
// bit-for-bit with the scanning kernels.
template <class Cost>
void kernel_envelope(const std::vector<double>& px,
                     const std::vector<double>& pval,
                     const std::vector<double>& cx, Cost cost,
                     std::vector<double>& cval,
                     std::vector<std::int32_t>& cpred) {
  const std::size_t pn = px.size(), cn = cx.size();
  std::vector<double> lval, rval;
  std::vector<std::int32_t> lpred, rpred;
  envelope_one_sided(px, pval, cx, cost, lval, lpred);

  std::vector<double> rpx(pn), rpv(pn), rcx(cn);
  for (std::size_t j = 0; j < pn; ++j) {
    rpx[j] = -px[pn - 1 - j];
    rpv[j] = pval[pn - 1 - j];
  }
  for (std::size_t i = 0; i < cn; ++i) rcx[i] = -cx[cn - 1 - i];
  envelope_one_sided(rpx, rpv, rcx, cost, rval, rpred);

  for (std::size_t i = 0; i < cn; ++i) {
    const std::size_t ri = cn - 1 - i;
    double rv = rval[ri];
    std::int32_t rj =
        rpred[ri] >= 0 ? static_cast<std::int32_t>(pn - 1 - rpred[ri]) : -1;
    if (rv < lval[i]) {
      cval[i] = rv;
      cpred[i] = rj;
    } else {
      cval[i] = lval[i];
      cpred[i] = lpred[i];
    }
  }
}

// ---------------------------------------------------------------------------
// Kernel selection
// ---------------------------------------------------------------------------

DpKernel select_kernel(const SolverOptions& opt, int dim, std::size_t pn,
                       std::size_t cn) {
  switch (opt.kernel) {
    case DpKernel::Plain:
      return DpKernel::Plain;
    case DpKernel::Pruned:
      return DpKernel::Pruned;
    case DpKernel::Monotone:
      return monotone_fast_path_applicable(dim, opt.alpha, opt.constraint)
                 ? DpKernel::Monotone
                 : DpKernel::Pruned;
    case DpKernel::Envelope:
      return envelope_fast_path_applicable(dim, opt.alpha, opt.constraint)
                 ? DpKernel::Envelope
                 : DpKernel::Pruned;
    case DpKernel::Auto:
      break;
  }
  if (pn >= kFastKernelMinPoints && cn >= kFastKernelMinPoints) {
    if (monotone_fast_path_applicable(dim, opt.alpha, opt.constraint))
      return DpKernel::Monotone;
    if (envelope_fast_path_applicable(dim, opt.alpha, opt.constraint))
      return DpKernel::Envelope;
  }
  return DpKernel::Pruned;
}

// ---------------------------------------------------------------------------
// Index-chain utilities (canonical tie rule)
// ---------------------------------------------------------------------------

std::vector<std::int32_t> reconstruct_chain(const DpTables& t,
                                            std::size_t layer_idx,
                                            std::int32_t idx) {
  std::vector<std::int32_t> chain(layer_idx + 1);
  std::int32_t cur = idx;
  for (std::size_t li = layer_idx;; --li) {
    chain[li] = cur;
    if (li == 0) break;
    cur = t.pred[li][static_cast<std::size_t>(cur)];
  }
  return chain;
}

// Lexicographic "path through a is smaller than path through b" for two
// predecessor indices at tables layer `layer_idx`.  Only called on exact
// value ties, which occur in crafted fixtures rather than sampled clouds, so
// clarity beats speed here.
bool chain_less(const DpTables& t, std::size_t layer_idx, std::int32_t a,
                std::int32_t b) {
  const auto ca = reconstruct_chain(t, layer_idx, a);
  const auto cb = reconstruct_chain(t, layer_idx, b);
  return ca < cb;
}

}  // namespace

bool monotone_fast_path_applicable(int dim, double alpha,
                                   const JumpConstraint& c) {
  return dim == 1 && alpha >= 1.0 && !c.bounded();
}

bool envelope_fast_path_applicable(int dim, double alpha,
                                   const JumpConstraint& c) {
  return dim == 1 && alpha < 1.0 && !c.bounded();
}

bool monge_precondition_holds(const std::vector<double>& prev_x,
                              const std::vector<double>& cur_x, double alpha) {
  if (prev_x.size() < 2 || cur_x.size() < 2) return true;
  bool ok = true;
  dispatch_cost(alpha, [&](auto cost) {
    for (std::size_t i = 0; ok && i + 1 < cur_x.size(); ++i)
      for (std::size_t j = 0; j + 1 < prev_x.size(); ++j) {
        const double c00 = cost(std::fabs(cur_x[i] - prev_x[j]));
        const double c11 = cost(std::fabs(cur_x[i + 1] - prev_x[j + 1]));
        const double c01 = cost(std::fabs(cur_x[i] - prev_x[j + 1]));
        const double c10 = cost(std::fabs(cur_x[i + 1] - prev_x[j]));
        if (c00 + c11 > c01 + c10) {
          ok = false;
          break;
        }
      }
  });
  return ok;
}

double passage_time(const GeodesicPath& path) {
  if (!(path.alpha > 0.0))
    throw std::invalid_argument("passage_time: alpha must be positive");
  if (path.steps.empty())
    throw std::invalid_argument("passage_time: empty path");
  const std::size_t d = path.start.size();
  double acc = 0.0;
  const SpacePoint* prev = &path.start;
  for (const SpacePoint& p : path.steps) {
    if (p.size() != d)
      throw std::invalid_argument("passage_time: inconsistent dimensions");
    acc += jump_cost(euclidean_distance(*prev, p), path.alpha);
    prev = &p;
  }
  return acc;
}

DpTables solve_layered(const Environment& env, const SpacePoint& start,
                       std::int64_t first_layer, std::int64_t last_layer,
                       const SolverOptions& opt) {
  if (first_layer < 1 || last_layer > env.n || first_layer > last_layer)
    throw std::invalid_argument("solve_layered: bad layer range");
  if (static_cast<int>(start.size()) != env.dim)
    throw std::invalid_argument("solve_layered: start dimension mismatch");
  if (!(opt.alpha > 0.0))
    throw std::invalid_argument("solve_layered: alpha must be positive");
  if (!(opt.constraint.cap > 0.0))
    throw std::invalid_argument("solve_layered: cap must be positive");

  const double cap = opt.constraint.cap;
  const int dim = env.dim;
  const std::size_t nlayers = static_cast<std::size_t>(last_layer - first_layer + 1);

  DpTables t;
  t.first_layer = first_layer;
  t.value.resize(nlayers);
  t.pred.resize(nlayers);

  {  // first transition: single start point
    const Layer& l0 = env.layer(first_layer);
    const std::size_t cn = l0.count();
    t.value[0].assign(cn, kInf);
    t.pred[0].assign(cn, -1);
    dispatch_cost(opt.alpha, [&](auto cost) {
      for (std::size_t i = 0; i < cn; ++i) {
        const double dist = euclidean_distance(start.data(), l0.point(i), dim);
        if (dist <= cap) t.value[0][i] = cost(dist);
      }
    });
  }

  std::vector<std::int32_t> value_order;
  for (std::size_t li = 1; li < nlayers; ++li) {
    const Layer& prev = env.layer(first_layer + static_cast<std::int64_t>(li) - 1);
    const Layer& cur = env.layer(first_layer + static_cast<std::int64_t>(li));
    const std::size_t pn = prev.count(), cn = cur.count();
    const std::vector<double>& pval = t.value[li - 1];
    t.value[li].assign(cn, kInf);
    t.pred[li].assign(cn, -1);
    if (pn == 0 || cn == 0) continue;

    const DpKernel kernel = select_kernel(opt, dim, pn, cn);
    const TiePrefer tie = [&t, li](std::int32_t a, std::int32_t b) {
      return chain_less(t, li - 1, a, b);
    };

    dispatch_cost(opt.alpha, [&](auto cost) {
      switch (kernel) {
        case DpKernel::Plain:
          kernel_plain(prev.coords.data(), pn, cur.coords.data(), cn, dim,
                       pval, cap, cost, &tie, t.value[li], t.pred[li]);
          break;
        case DpKernel::Pruned: {
          value_order.resize(pn);
          for (std::size_t j = 0; j < pn; ++j)
            value_order[j] = static_cast<std::int32_t>(j);
          std::sort(value_order.begin(), value_order.end(),
                    [&pval](std::int32_t a, std::int32_t b) {
                      const double va = pval[static_cast<std::size_t>(a)];
                      const double vb = pval[static_cast<std::size_t>(b)];
                      return va < vb || (va == vb && a < b);
                    });
          kernel_pruned(prev.coords.data(), pn, cur.coords.data(), cn, dim,
                        pval, value_order, cap, cost, &tie, t.value[li],
                        t.pred[li]);
          break;
        }
        case DpKernel::Monotone:
          kernel_monotone(prev.coords, pval, cur.coords, cost, t.value[li],
                          t.pred[li]);
          break;
        case DpKernel::Envelope:
          kernel_envelope(prev.coords, pval, cur.coords, cost, t.value[li],
                          t.pred[li]);
          break;
        case DpKernel::Auto:
          break;  // unreachable: select_kernel never returns Auto
      }
    });
  }
  return t;
}

namespace {

GeodesicResult build_result(const Environment& env, const DpTables& t,
                            std::int64_t start_time, const SpacePoint& start,
                            std::int32_t final_idx, double alpha,
                            const std::optional<SpacePoint>& appended_terminal,
                            double total_value) {
  const std::size_t depth = t.value.size();
  const auto chain = reconstruct_chain(t, depth - 1, final_idx);

  GeodesicResult r;
  r.path.start_time = start_time;
  r.path.start = start;
  r.path.alpha = alpha;
  r.passage_time = total_value;
  // prev points into steps; reserve so push_back never reallocates under it.
  r.path.steps.reserve(depth + (appended_terminal ? 1 : 0));
  r.jumps.reserve(depth + (appended_terminal ? 1 : 0));
  const SpacePoint* prev = &r.path.start;
  for (std::size_t li = 0; li < depth; ++li) {
    const Layer& layer = env.layer(t.first_layer + static_cast<std::int64_t>(li));
    r.path.steps.push_back(layer.point_vec(static_cast<std::size_t>(chain[li])));
    r.jumps.push_back(euclidean_distance(*prev, r.path.steps.back()));
    prev = &r.path.steps.back();
  }
  if (appended_terminal) {
    r.path.steps.push_back(*appended_terminal);
    r.jumps.push_back(euclidean_distance(*prev, r.path.steps.back()));
  }
  return r;
}

}  // namespace

std::optional<GeodesicResult> geodesic_to_hyperplane(const Environment& env,
                                                     const SolverOptions& opt) {
  const DpTables t = solve_layered(env, env.origin(), 1, env.n, opt);
  const std::vector<double>& last = t.value.back();
  double best = kInf;
  for (double v : last) best = std::min(best, v);
  if (best >= kInf) return std::nullopt;

  std::int32_t pick = -1;
  for (std::size_t j = 0; j < last.size(); ++j) {
    if (last[j] != best) continue;
    const std::int32_t cand = static_cast<std::int32_t>(j);
    if (pick < 0 || chain_less(t, t.value.size() - 1, cand, pick)) pick = cand;
  }
  return build_result(env, t, 0, env.origin(), pick, opt.alpha, std::nullopt,
                      best);
}

namespace {

bool point_in_layer(const Layer& layer, const SpacePoint& p) {
  const int d = layer.dim;
  const std::size_t m = layer.count();
  std::size_t lo = 0, hi = m;
  while (lo < hi) {  // layers are sorted lexicographically
    const std::size_t mid = lo + (hi - lo) / 2;
    if (lex_compare(layer.point(mid), p.data(), d) < 0)
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo < m && lex_compare(layer.point(lo), p.data(), d) == 0;
}

bool is_origin(const SpacePoint& p) {
  for (double c : p)
    if (c != 0.0) return false;
  return true;
}

}  // namespace

std::optional<GeodesicResult> geodesic_point_to_point(
    const Environment& env, std::int64_t tv, const SpacePoint& v,
    std::int64_t tw, const SpacePoint& w, bool free_terminal,
    const SolverOptions& opt) {
  if (tv < 0 || tw <= tv || tw > env.n)
    throw std::invalid_argument("geodesic_point_to_point: bad time indices");
  if (static_cast<int>(v.size()) != env.dim ||
      static_cast<int>(w.size()) != env.dim)
    throw std::invalid_argument("geodesic_point_to_point: dimension mismatch");
  if (tv == 0) {
    if (!is_origin(v))
      throw std::invalid_argument(
          "geodesic_point_to_point: start at time 0 must be the origin");
  } else if (!point_in_layer(env.layer(tv), v)) {
    throw std::invalid_argument(
        "geodesic_point_to_point: start point not in its layer");
  }
  if (!free_terminal && !point_in_layer(env.layer(tw), w))
    throw std::invalid_argument(
        "geodesic_point_to_point: terminal point not in its layer");
  if (!(opt.alpha > 0.0))
    throw std::invalid_argument("geodesic_point_to_point: alpha must be positive");

  const double cap = opt.constraint.cap;

  if (tw == tv + 1) {  // single direct hop
    const double dist = euclidean_distance(v, w);
    if (dist > cap) return std::nullopt;
    GeodesicResult r;
    r.path.start_time = tv;
    r.path.start = v;
    r.path.alpha = opt.alpha;
    r.path.steps.push_back(w);
    r.jumps.push_back(dist);
    r.passage_time = jump_cost(dist, opt.alpha);
    return r;
  }

  const DpTables t = solve_layered(env, v, tv + 1, tw - 1, opt);
  const Layer& lastl = env.layer(tw - 1);
  const std::vector<double>& last = t.value.back();

  double best = kInf;
  std::int32_t pick = -1;
  dispatch_cost(opt.alpha, [&](auto cost) {
    for (std::size_t z = 0; z < last.size(); ++z) {
      if (last[z] >= kInf) continue;
      const double dist = euclidean_distance(lastl.point(z), w.data(), env.dim);
      if (dist > cap) continue;
      const double cand = last[z] + cost(dist);
      const std::int32_t cz = static_cast<std::int32_t>(z);
      if (cand < best) {
        best = cand;
        pick = cz;
      } else if (cand == best && pick >= 0 &&
                 chain_less(t, t.value.size() - 1, cz, pick)) {
        pick = cz;
      }
    }
  });
  if (pick < 0) return std::nullopt;
  return build_result(env, t, tv, v, pick, opt.alpha, w, best);
}

// ---------------------------------------------------------------------------
// Exhaustive reference solvers
// ---------------------------------------------------------------------------

namespace {

std::optional<GeodesicResult> brute_force_core(
    const Environment& env, std::int64_t start_time, const SpacePoint& start,
    std::int64_t first_layer, std::int64_t last_layer,
    const std::optional<SpacePoint>& final_target, const SolverOptions& opt,
    double max_paths) {
  const double cap = opt.constraint.cap;
  const int dim = env.dim;

  double paths = 1.0;
  for (std::int64_t k = first_layer; k <= last_layer; ++k)
    paths *= static_cast<double>(env.layer(k).count());
  if (paths > max_paths)
    throw std::length_error("brute_force: instance has too many paths");

  const std::size_t depth = static_cast<std::size_t>(last_layer - first_layer + 1);
  std::vector<std::int32_t> idx(depth), best_idx;
  double best = kInf;
  bool found = false;

  // Depth-first enumeration in lexicographic index order; the first path that
  // attains the minimum is kept, which is exactly the canonical tie rule.
  std::function<void(std::size_t, const double*, double)> rec =
      [&](std::size_t d, const double* pos, double acc) {
        if (d == depth) {
          double total = acc;
          if (final_target) {
            const double dist =
                euclidean_distance(pos, final_target->data(), dim);
            if (dist > cap) return;
            total = acc + jump_cost(dist, opt.alpha);
          }
          if (total < best) {
            best = total;
            best_idx = idx;
            found = true;
          }
          return;
        }
        const Layer& layer = env.layer(first_layer + static_cast<std::int64_t>(d));
        for (std::size_t j = 0; j < layer.count(); ++j) {
          const double dist = euclidean_distance(pos, layer.point(j), dim);
          if (dist > cap) continue;
          idx[d] = static_cast<std::int32_t>(j);
          rec(d + 1, layer.point(j), acc + jump_cost(dist, opt.alpha));
        }
      };
  rec(0, start.data(), 0.0);
  if (!found) return std::nullopt;

  GeodesicResult r;
  r.path.start_time = start_time;
  r.path.start = start;
  r.path.alpha = opt.alpha;
  r.passage_time = best;
  // prev points into steps; reserve so push_back never reallocates under it.
  r.path.steps.reserve(depth + (final_target ? 1 : 0));
  r.jumps.reserve(depth + (final_target ? 1 : 0));
  const SpacePoint* prev = &r.path.start;
  for (std::size_t d = 0; d < depth; ++d) {
    const Layer& layer = env.layer(first_layer + static_cast<std::int64_t>(d));
    r.path.steps.push_back(layer.point_vec(static_cast<std::size_t>(best_idx[d])));
    r.jumps.push_back(euclidean_distance(*prev, r.path.steps.back()));
    prev = &r.path.steps.back();
  }
  if (final_target) {
    r.path.steps.push_back(*final_target);
    r.jumps.push_back(euclidean_distance(*prev, r.path.steps.back()));
  }
  return r;
}

}  // namespace

std::optional<GeodesicResult> brute_force_geodesic(const Environment& env,
                                                   const SolverOptions& opt,
                                                   double max_paths) {
  return brute_force_core(env, 0, env.origin(), 1, env.n, std::nullopt, opt,
                          max_paths);
}

std::optional<GeodesicResult> brute_force_point_to_point(
    const Environment& env, std::int64_t tv, const SpacePoint& v,
    std::int64_t tw, const SpacePoint& w, bool free_terminal,
    const SolverOptions& opt, double max_paths) {
  if (tv < 0 || tw <= tv || tw > env.n)
    throw std::invalid_argument("brute_force_point_to_point: bad time indices");
  if (!free_terminal && !point_in_layer(env.layer(tw), w))
    throw std::invalid_argument(
        "brute_force_point_to_point: terminal point not in its layer");
  if (tw == tv + 1) {
    const double dist = euclidean_distance(v, w);
    if (dist > opt.constraint.cap) return std::nullopt;
    GeodesicResult r;
    r.path.start_time = tv;
    r.path.start = v;
    r.path.alpha = opt.alpha;
    r.path.steps.push_back(w);
    r.jumps.push_back(dist);
    r.passage_time = jump_cost(dist, opt.alpha);
    return r;
  }
  return brute_force_core(env, tv, v, tv + 1, tw - 1, w, opt, max_paths);
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

void serialize_geodesic(const GeodesicResult& result, std::int64_t n,
                        std::uint64_t seed, std::ostream& out) {
  double mj = 0.0;
  for (double j : result.jumps) mj = std::max(mj, j);
  json header;
  header["alpha"] = result.path.alpha;
  header["n"] = n;
  header["seed"] = seed;
  header["T_n"] = result.passage_time;
  header["max_jump"] = mj;
  out << header.dump() << '\n';
  for (std::size_t i = 0; i < result.path.steps.size(); ++i) {
    json line;
    line["k"] = result.path.start_time + static_cast<std::int64_t>(i) + 1;
    line["x"] = result.path.steps[i];
    line["jump"] = result.jumps[i];
    out << line.dump() << '\n';
  }
}

GeodesicDump parse_geodesic(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("parse_geodesic: missing header");
  json header = json::parse(line);

  GeodesicDump d;
  d.alpha = header.at("alpha").get<double>();
  d.n = header.at("n").get<std::int64_t>();
  d.seed = header.at("seed").get<std::uint64_t>();
  d.total = header.at("T_n").get<double>();
  d.max_jump = header.at("max_jump").get<double>();
  d.result.path.alpha = d.alpha;
  d.result.passage_time = d.total;

  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json rec = json::parse(line);
    if (first) {
      d.result.path.start_time = rec.at("k").get<std::int64_t>() - 1;
      first = false;
    }
    d.result.path.steps.push_back(rec.at("x").get<SpacePoint>());
    d.result.jumps.push_back(rec.at("jump").get<double>());
  }
  if (first) throw std::invalid_argument("parse_geodesic: no path steps");
  d.result.path.start =
      SpacePoint(d.result.path.steps.front().size(), 0.0);
  return d;
}

GeodesicDump parse_geodesic(const std::string& text) {
  std::istringstream is(text);
  return parse_geodesic(is);
}

}  // namespace fpp
