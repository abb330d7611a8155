#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fpp/geometry.hpp"

namespace fpp {

// Spatial sampling window: points live in the cube [-half_width, half_width]^d.
struct WindowSpec {
  double half_width = 0.0;
  int dimension = 1;
};

// All points sharing one time index.  Coordinates are stored flat
// (count * dim doubles, row per point) and kept sorted lexicographically,
// which fixes a canonical point order independent of sampling order.
struct Layer {
  std::int64_t time = 0;
  int dim = 1;
  std::vector<double> coords;

  std::size_t count() const { return dim == 0 ? 0 : coords.size() / dim; }
  const double* point(std::size_t i) const { return coords.data() + i * dim; }
  SpacePoint point_vec(std::size_t i) const {
    return SpacePoint(point(i), point(i) + dim);
  }
};

// A realization of the layered point cloud on times 1..n, restricted to the
// sampling window.  The start of every path is the space origin at time 0;
// it is implicit and not stored as a layer.
struct Environment {
  std::int64_t n = 0;
  int dim = 1;
  double half_width = 0.0;
  std::uint64_t seed = 0;
  std::vector<Layer> layers;  // layers[k-1] has time k

  const Layer& layer(std::int64_t k) const { return layers[static_cast<std::size_t>(k - 1)]; }
  SpacePoint origin() const { return SpacePoint(static_cast<std::size_t>(dim), 0.0); }
};

// Draws a Poisson cloud of unit intensity on layers 1..n inside the window.
// Layer k depends only on (seed, k), so any layer can be regenerated in
// isolation and the result never depends on generation order.  Per layer the
// point count is Poisson((2W)^d) and positions are i.i.d. uniform.
//
// Throws std::invalid_argument for non-positive n/d/W, for a window whose
// dimension disagrees with d, and when n*(2W)^d exceeds
// max_expected_points (guards against accidentally unrepresentable clouds).
Environment sample_environment(std::int64_t n, int d, const WindowSpec& window,
                               std::uint64_t seed,
                               double max_expected_points = 2.5e8);

// Builds an environment from explicit per-layer point lists
// (points_by_layer[k-1] holds the points of layer k; empty layers allowed).
// Intended for crafted fixtures.  The dimension is inferred from the first
// nonempty layer.  Throws std::invalid_argument on inconsistent dimensions,
// non-finite coordinates, or exact duplicate points within a layer.
Environment deterministic_environment(
    const std::vector<std::vector<SpacePoint>>& points_by_layer);

// JSON-lines serialization: one header object
//   {"n":..., "d":..., "W":..., "seed":...}
// followed by one line {"k":..., "pts":[[...],...]} per layer.  Numbers are
// written in shortest round-trip form, so parse(serialize(env)) reproduces
// every coordinate bit-for-bit.
void serialize_environment(const Environment& env, std::ostream& out);
std::string serialize_environment(const Environment& env);
Environment parse_environment(std::istream& in);
Environment parse_environment(const std::string& text);

// True when every point of `path_points` keeps at least
// margin_fraction * half_width distance from the window boundary in every
// coordinate.  Used to detect samples whose optimal path may have been
// distorted by the window truncation.  margin_fraction must lie in (0, 0.5).
bool window_adequate(double half_width, const std::vector<SpacePoint>& path_points,
                     double margin_fraction);

}  // namespace fpp
