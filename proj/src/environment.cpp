#include "fpp/environment.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "fpp/rng.hpp"

namespace fpp {
namespace {

using nlohmann::json;

// Sorts the points of a layer lexicographically.  Returns the permutation-
// free canonical layout; exact duplicate rows are reported via `had_dup`.
void canonicalize_layer(Layer& layer, bool* had_dup) {
  const int d = layer.dim;
  const std::size_t m = layer.count();
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return lex_compare(layer.point(a), layer.point(b), d) < 0;
  });
  std::vector<double> sorted;
  sorted.reserve(layer.coords.size());
  for (std::size_t i = 0; i < m; ++i) {
    if (i > 0 && lex_compare(layer.point(order[i]), layer.point(order[i - 1]), d) == 0) {
      if (had_dup) *had_dup = true;
      continue;  // drop exact duplicates (probability zero under sampling)
    }
    const double* p = layer.point(order[i]);
    sorted.insert(sorted.end(), p, p + d);
  }
  layer.coords = std::move(sorted);
}

}  // namespace

Environment sample_environment(std::int64_t n, int d, const WindowSpec& window,
                               std::uint64_t seed, double max_expected_points) {
  if (n <= 0) throw std::invalid_argument("sample_environment: n must be positive");
  if (d <= 0) throw std::invalid_argument("sample_environment: d must be positive");
  if (!(window.half_width > 0.0) || !std::isfinite(window.half_width))
    throw std::invalid_argument("sample_environment: window half-width must be positive");
  if (window.dimension != d)
    throw std::invalid_argument("sample_environment: window dimension mismatch");

  const double volume = std::pow(2.0 * window.half_width, d);
  if (static_cast<double>(n) * volume > max_expected_points) {
    throw std::invalid_argument(
        "sample_environment: window too large, expected total point count " +
        std::to_string(static_cast<double>(n) * volume) + " exceeds budget " +
        std::to_string(max_expected_points));
  }

  Environment env;
  env.n = n;
  env.dim = d;
  env.half_width = window.half_width;
  env.seed = seed;
  env.layers.resize(static_cast<std::size_t>(n));
  for (std::int64_t k = 1; k <= n; ++k) {
    Layer& layer = env.layers[static_cast<std::size_t>(k - 1)];
    layer.time = k;
    layer.dim = d;
    RandomStream rs(mix_seed(seed, static_cast<std::uint64_t>(k)));
    const std::int64_t count = rs.next_poisson(volume);
    layer.coords.resize(static_cast<std::size_t>(count) * d);
    for (double& c : layer.coords)
      c = rs.next_uniform(-window.half_width, window.half_width);
    canonicalize_layer(layer, nullptr);
  }
  return env;
}

Environment deterministic_environment(
    const std::vector<std::vector<SpacePoint>>& points_by_layer) {
  if (points_by_layer.empty())
    throw std::invalid_argument("deterministic_environment: need at least one layer");

  int d = 0;
  for (const auto& layer_pts : points_by_layer)
    for (const auto& p : layer_pts) {
      if (d == 0) d = static_cast<int>(p.size());
      if (p.empty() || static_cast<int>(p.size()) != d)
        throw std::invalid_argument(
            "deterministic_environment: inconsistent point dimensions");
      for (double c : p)
        if (!std::isfinite(c))
          throw std::invalid_argument(
              "deterministic_environment: non-finite coordinate");
    }
  if (d == 0) d = 1;  // all layers empty: dimension is arbitrary

  Environment env;
  env.n = static_cast<std::int64_t>(points_by_layer.size());
  env.dim = d;
  env.seed = 0;

  double extent = 0.0;
  env.layers.resize(points_by_layer.size());
  for (std::size_t i = 0; i < points_by_layer.size(); ++i) {
    Layer& layer = env.layers[i];
    layer.time = static_cast<std::int64_t>(i + 1);
    layer.dim = d;
    for (const auto& p : points_by_layer[i]) {
      layer.coords.insert(layer.coords.end(), p.begin(), p.end());
      for (double c : p) extent = std::max(extent, std::fabs(c));
    }
    bool had_dup = false;
    canonicalize_layer(layer, &had_dup);
    if (had_dup)
      throw std::invalid_argument(
          "deterministic_environment: duplicate point in layer " +
          std::to_string(layer.time));
  }
  env.half_width = extent + 1.0;
  return env;
}

void serialize_environment(const Environment& env, std::ostream& out) {
  json header;
  header["n"] = env.n;
  header["d"] = env.dim;
  header["W"] = env.half_width;
  header["seed"] = env.seed;
  out << header.dump() << '\n';
  for (const Layer& layer : env.layers) {
    json line;
    line["k"] = layer.time;
    json pts = json::array();
    for (std::size_t i = 0; i < layer.count(); ++i) {
      json pt = json::array();
      for (int c = 0; c < layer.dim; ++c) pt.push_back(layer.point(i)[c]);
      pts.push_back(std::move(pt));
    }
    line["pts"] = std::move(pts);
    out << line.dump() << '\n';
  }
}

std::string serialize_environment(const Environment& env) {
  std::ostringstream os;
  serialize_environment(env, os);
  return os.str();
}

Environment parse_environment(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("parse_environment: missing header line");
  json header = json::parse(line);

  Environment env;
  env.n = header.at("n").get<std::int64_t>();
  env.dim = header.at("d").get<int>();
  env.half_width = header.at("W").get<double>();
  env.seed = header.at("seed").get<std::uint64_t>();
  if (env.n <= 0 || env.dim <= 0)
    throw std::invalid_argument("parse_environment: invalid header");

  env.layers.resize(static_cast<std::size_t>(env.n));
  std::size_t seen = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json rec = json::parse(line);
    const std::int64_t k = rec.at("k").get<std::int64_t>();
    if (k < 1 || k > env.n)
      throw std::invalid_argument("parse_environment: layer index out of range");
    Layer& layer = env.layers[static_cast<std::size_t>(k - 1)];
    layer.time = k;
    layer.dim = env.dim;
    layer.coords.clear();
    for (const auto& pt : rec.at("pts")) {
      if (static_cast<int>(pt.size()) != env.dim)
        throw std::invalid_argument("parse_environment: point dimension mismatch");
      for (const auto& c : pt) layer.coords.push_back(c.get<double>());
    }
    canonicalize_layer(layer, nullptr);
    ++seen;
  }
  if (seen != static_cast<std::size_t>(env.n))
    throw std::invalid_argument("parse_environment: expected " +
                                std::to_string(env.n) + " layer lines, got " +
                                std::to_string(seen));
  for (std::int64_t k = 1; k <= env.n; ++k)
    env.layers[static_cast<std::size_t>(k - 1)].time = k;
  return env;
}

Environment parse_environment(const std::string& text) {
  std::istringstream is(text);
  return parse_environment(is);
}

bool window_adequate(double half_width, const std::vector<SpacePoint>& path_points,
                     double margin_fraction) {
  if (!(margin_fraction > 0.0) || !(margin_fraction < 0.5))
    throw std::invalid_argument("window_adequate: margin_fraction must be in (0, 0.5)");
  const double margin = margin_fraction * half_width;
  for (const auto& p : path_points)
    for (double c : p)
      if (half_width - std::fabs(c) < margin) return false;
  return true;
}

}  // namespace fpp
