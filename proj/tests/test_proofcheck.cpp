#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "fpp/environment.hpp"
#include "fpp/geodesic.hpp"
#include "fpp/proofcheck.hpp"
#include "fpp/rng.hpp"

using fpp::Environment;
using fpp::FaceSpec;
using fpp::Layer;
using fpp::SpacePoint;
using fpp::TubeSpec;

namespace {

FaceSpec face(double alpha, double ell, int length, double c1, double h,
              double big_m = 1.0, SpacePoint center = {0.0}) {
  FaceSpec f;
  f.block = 0;
  f.center = std::move(center);
  f.ell = ell;
  f.length = length;
  f.c1 = c1;
  f.big_m = big_m;
  f.alpha = alpha;
  f.grid_step = h;
  return f;
}

// Cheapest two-hop cost v -> p -> w over the points p of one layer.
double two_hop_min(const Layer& layer, const SpacePoint& v, const SpacePoint& w,
                   double alpha) {
  double best = fpp::kInf;
  for (std::size_t i = 0; i < layer.count(); ++i) {
    const SpacePoint p = layer.point_vec(i);
    best = std::min(best, fpp::jump_cost(fpp::euclidean_distance(v, p), alpha) +
                              fpp::jump_cost(fpp::euclidean_distance(p, w), alpha));
  }
  return best;
}

TubeSpec basic_tube(double alpha = 0.5, double drift = 0.0, int length = 4) {
  TubeSpec s;
  s.anchor = {0.0};
  s.anchor_time = 0;
  s.drift = {drift};
  s.length = length;
  s.gap = 4.0;
  s.narrow_radius = 0.25;
  s.wide_radius = 8.0;
  s.alpha = alpha;
  return s;
}

}  // namespace

TEST_CASE("face validation rejects unusable parameters") {
  const Environment env = fpp::sample_environment(4, 1, fpp::WindowSpec{5.0, 1}, 1);
  CHECK_THROWS_AS(fpp::is_black(env, face(1.0, 2.0, 2, 0.1, 0.25)),
                  std::invalid_argument);  // alpha = 1 excluded
  CHECK_THROWS_AS(fpp::is_black(env, face(0.5, 2.0, 2, 0.1, 0.75)),
                  std::invalid_argument);  // grid too coarse for the margin
  CHECK_THROWS_AS(fpp::is_black(env, face(0.5, 2.0, 2, 0.0, 0.25)),
                  std::invalid_argument);
  CHECK_THROWS_AS(fpp::is_black(env, face(0.5, 2.0, 12, 0.1, 0.25)),
                  std::invalid_argument);  // env too short for the block
  FaceSpec f5 = face(0.5, 2.0, 2, 0.1, 0.25);
  f5.center = {0.0, 0.0, 0.0, 0.0, 0.0};
  CHECK_THROWS_AS(fpp::is_black(env, f5), std::invalid_argument);  // d > 4
}

TEST_CASE("scale factory derives slab scale and integer length") {
  const FaceSpec f = fpp::make_face_spec(std::exp(9.0), 1.0, 0, {0.0}, 0.1,
                                         1.0, 0.5, 0.25);
  CHECK(f.ell == doctest::Approx(9.0).epsilon(1e-12));
  CHECK(f.length == 9);
  CHECK(f.n_scale == doctest::Approx(std::exp(9.0)));
  CHECK(f.beta == 1.0);

  // A scale that is an integer up to rounding noise must not jump a level:
  // (log e^16)^(1/4) = 2 up to the last bit, so the length stays 2.
  const FaceSpec g = fpp::make_face_spec(std::exp(16.0), 0.25, 0, {0.0}, 0.1,
                                         1.0, 0.5, 0.25);
  CHECK(g.ell == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(g.length == 2);
}

TEST_CASE("a block of a single layer is never expensive") {
  // The start cell touches the target hyperplane, so a lattice start reaches
  // a lattice target at zero cost.
  Environment env;
  env.n = 1;
  env.dim = 1;
  env.half_width = 10.0;
  env.layers.resize(1);
  env.layers[0].time = 1;
  env.layers[0].dim = 1;
  CHECK_FALSE(fpp::is_black(env, face(0.5, 1.0, 1, 0.1, 0.25)));
  CHECK_FALSE(fpp::is_black(env, face(1.5, 1.0, 1, 0.1, 0.25)));
}

TEST_CASE("blackness is monotone: harder threshold implies easier one") {
  // Same realization, same rigor margin; halving c1 only lowers the bar.
  std::mt19937_64 rng(60601);
  int black_seen = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::uint64_t seed = rng();
    const double c1 = std::exp(std::uniform_real_distribution<double>(
        std::log(0.01), std::log(0.4))(rng));
    const bool concave = trial % 2 == 0;
    const FaceSpec f = concave ? face(0.5, 2.0, 2, c1, 0.25)
                               : face(1.5, 2.0, 2, c1, 0.05);
    const Environment env = fpp::sample_environment(1, 1, fpp::WindowSpec{30.0, 1}, seed);
    if (fpp::is_black(env, f)) {
      ++black_seen;
      FaceSpec half = f;
      half.c1 = c1 / 2.0;
      CHECK(fpp::is_black(env, half));
    }
  }
  CHECK(black_seen > 0);  // the implication must not hold vacuously
}

TEST_CASE("grid verdicts are sound for continuum start points") {
  // When the margin-augmented grid check passes, the unaugmented inequality
  // must hold at arbitrary (off-grid) starts in the cell.  This is the
  // property the margin was sized for.
  std::mt19937_64 rng(60602);
  std::uniform_real_distribution<double> cell(-2.0, 2.0);
  int checked_faces = 0;

  SUBCASE("concave costs") {
    for (int trial = 0; trial < 60 && checked_faces < 8; ++trial) {
      const FaceSpec f = face(0.5, 2.0, 2, 0.05, 0.25);
      const Environment env =
          fpp::sample_environment(1, 1, fpp::WindowSpec{30.0, 1}, rng());
      if (!fpp::is_black(env, f)) continue;
      ++checked_faces;
      const double thresh = f.c1 * f.ell;  // no margin here
      const double rlim = std::pow(thresh, 1.0 / f.alpha);
      for (int probe = 0; probe < 300; ++probe) {
        const SpacePoint v = {cell(rng)};
        for (long w = static_cast<long>(std::ceil(v[0] - rlim));
             w <= static_cast<long>(std::floor(v[0] + rlim)); ++w) {
          const double t =
              two_hop_min(env.layer(1), v, {static_cast<double>(w)}, f.alpha);
          CHECK(t >= thresh);
        }
      }
    }
    CHECK(checked_faces > 0);
  }

  SUBCASE("convex costs") {
    for (int trial = 0; trial < 120 && checked_faces < 8; ++trial) {
      const FaceSpec f = face(1.5, 2.0, 2, 0.1, 0.05);
      const Environment env =
          fpp::sample_environment(1, 1, fpp::WindowSpec{30.0, 1}, rng());
      if (!fpp::is_black(env, f)) continue;
      ++checked_faces;
      const double rw = 2.0 * f.big_m * f.ell;
      for (int probe = 0; probe < 300; ++probe) {
        const SpacePoint v = {cell(rng)};
        for (long w = static_cast<long>(std::ceil(-rw));
             w <= static_cast<long>(std::floor(rw)); ++w) {
          const SpacePoint wp = {static_cast<double>(w)};
          const double th =
              (std::pow(fpp::euclidean_distance(v, wp) / f.ell, f.alpha) + f.c1) *
              f.ell;  // no margin here
          CHECK(two_hop_min(env.layer(1), v, wp, f.alpha) >= th);
        }
      }
    }
    CHECK(checked_faces > 0);
  }
}

TEST_CASE("black-probability estimates: determinism and threshold trend") {
  const FaceSpec easy = face(0.5, 2.0, 2, 0.01, 0.25);
  const FaceSpec hard = face(0.5, 2.0, 2, 0.5, 0.25);
  const auto pe = fpp::estimate_black_probability(easy, 200, 7);
  const auto ph = fpp::estimate_black_probability(hard, 200, 7);
  CHECK(pe.trials == 200);
  CHECK(pe.estimate >= 0.0);
  CHECK(pe.estimate <= 1.0);
  CHECK(pe.stderr_ ==
        doctest::Approx(std::sqrt(pe.estimate * (1.0 - pe.estimate) / 200.0)));
  // A 50x lower bar cannot be harder to clear.
  CHECK(pe.estimate >= ph.estimate);

  const auto pe2 = fpp::estimate_black_probability(easy, 200, 7);
  CHECK(pe2.estimate == pe.estimate);

  const auto rep = nlohmann::json::parse(fpp::black_report_json(easy, pe));
  for (const char* key : {"c1", "beta", "alpha", "L", "trials", "estimate", "stderr"}) {
    CAPTURE(key);
    CHECK(rep.contains(key));
  }
  CHECK(rep["trials"] == 200);
  CHECK(rep["L"] == 2);
}

TEST_CASE("tube validation rejects malformed corridors") {
  TubeSpec s = basic_tube();
  s.gap = 0.4;  // below 2 * narrow_radius
  CHECK_THROWS_AS(fpp::build_tunneling_tube(s, 1), std::invalid_argument);
  s = basic_tube();
  s.length = 1;
  CHECK_THROWS_AS(fpp::build_tunneling_tube(s, 1), std::invalid_argument);
  s = basic_tube();
  s.wide_radius = 0.1;
  CHECK_THROWS_AS(fpp::build_tunneling_tube(s, 1), std::invalid_argument);
  s = basic_tube(0.5, 0.3);  // drift with a concave cost
  CHECK_THROWS_AS(fpp::build_tunneling_tube(s, 1), std::invalid_argument);
}

TEST_CASE("built tubes verify and perturbed ones do not") {
  std::mt19937_64 rng(60603);
  for (int trial = 0; trial < 30; ++trial) {
    const bool convex = trial % 2 == 1;
    const TubeSpec s = convex ? basic_tube(1.5, 0.7, 5) : basic_tube(0.5, 0.0, 4);
    const std::uint64_t seed = rng();
    const std::vector<Layer> tube = fpp::build_tunneling_tube(s, seed);
    REQUIRE(tube.size() == static_cast<std::size_t>(s.length) + 1);
    CHECK(fpp::is_tunneling(tube, s));

    // Every interior point sits inside its narrow ball.
    for (int l = 1; l < s.length; ++l) {
      const Layer& layer = tube[static_cast<std::size_t>(l)];
      REQUIRE(layer.count() == 1);
      SpacePoint center = {l * s.drift[0] + (l == s.length / 2 ? 1.5 * s.gap : 0.0)};
      CHECK(fpp::euclidean_distance(layer.point_vec(0), center) <= s.narrow_radius);
    }

    // An intruder inside the wide tube breaks the property.
    std::vector<Layer> spoiled = tube;
    {
      Layer& mid = spoiled[1];
      std::vector<double> c(mid.coords.begin(), mid.coords.end());
      c.push_back(s.drift[0] + 1.0);  // well within wide_radius of the corridor
      mid.coords = c;
    }
    CHECK_FALSE(fpp::is_tunneling(spoiled, s));

    // A missing interior point breaks it too.
    spoiled = tube;
    spoiled[2].coords.clear();
    CHECK_FALSE(fpp::is_tunneling(spoiled, s));

    // So does a displaced endpoint.
    spoiled = tube;
    spoiled[0].coords[0] += 0.25;
    CHECK_FALSE(fpp::is_tunneling(spoiled, s));

    // And a second point inside the narrow ball.
    spoiled = tube;
    {
      Layer& mid = spoiled[1];
      std::vector<double> c(mid.coords.begin(), mid.coords.end());
      c.push_back(c[0] + s.narrow_radius / 3.0);
      mid.coords = c;
    }
    CHECK_FALSE(fpp::is_tunneling(spoiled, s));
  }
}

TEST_CASE("tube scale factory follows the scaling forms") {
  const double n = std::exp(9.0);
  const TubeSpec s = fpp::make_tube_spec(n, 1.0, 0.5, 0.3, 0.5, {0.0}, 0, {0.0});
  CHECK(s.length == 9);
  CHECK(s.gap == doctest::Approx(3.0).epsilon(1e-12));        // (log n)^0.5
  CHECK(s.wide_radius == doctest::Approx(81.0).epsilon(1e-12));
  // c1^(2/min(alpha,1)) with alpha = 0.5: 0.3^4
  CHECK(s.narrow_radius == doctest::Approx(0.0081).epsilon(1e-12));
  CHECK_THROWS_AS(fpp::make_tube_spec(n, 1.0, 0.5, 1.5, 0.5, {0.0}, 0, {0.0}),
                  std::invalid_argument);
}

TEST_CASE("largest interior jump ignores the first and last hop") {
  fpp::GeodesicResult r;
  r.jumps = {5.0, 1.0, 7.0, 3.0};
  CHECK(fpp::max_interior_jump(r) == 7.0);
  r.jumps = {5.0, 3.0};
  CHECK(fpp::max_interior_jump(r) == 0.0);
}

TEST_CASE("capped geodesics through a tube are forced into the detour jump") {
  std::mt19937_64 rng(60604);
  for (int trial = 0; trial < 25; ++trial) {
    const bool convex = trial % 2 == 1;
    TubeSpec s = convex ? basic_tube(1.2, 0.5, 6) : basic_tube(0.5, 0.0, 5);
    const auto tube = fpp::build_tunneling_tube(s, rng());
    const Environment env = fpp::tube_environment(tube, s);
    REQUIRE(env.n == s.length);

    fpp::SolverOptions opt;
    opt.alpha = s.alpha;
    opt.constraint = fpp::JumpConstraint::capped(fpp::tube_jump_cap(s));
    const auto r = fpp::geodesic_to_hyperplane(env, opt);
    REQUIRE(r.has_value());  // the cap is sized to keep the tube passable

    const double drift_len = std::fabs(s.drift[0]);
    const double lo = 1.5 * s.gap - 2.0 * s.narrow_radius - drift_len;
    const double hi = 1.5 * s.gap + 2.0 * s.narrow_radius + drift_len;
    const double forced = fpp::max_interior_jump(*r);
    CHECK(forced >= lo - 1e-9);
    CHECK(forced <= hi + 1e-9);
  }
}
