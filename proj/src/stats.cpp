#include "fpp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <nlohmann/json.hpp>

#include "fpp/rng.hpp"

namespace fpp {
namespace {

using nlohmann::json;

// Neumaier-compensated accumulator: makes long sums independent of rounding
// drift without changing their dependence on input order (callers that need
// permutation invariance sort first).
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

std::tuple<double, double> mean_and_unbiased_var(const std::vector<double>& xs) {
  const std::size_t m = xs.size();
  CompensatedSum s;
  for (double x : xs) s.add(x);
  const double mean = s.value() / static_cast<double>(m);
  if (m < 2) return {mean, 0.0};
  CompensatedSum sq;
  for (double x : xs) {
    const double d = x - mean;
    sq.add(d * d);
  }
  return {mean, sq.value() / static_cast<double>(m - 1)};
}

}  // namespace

double max_jump(const GeodesicResult& result) {
  double m = 0.0;
  for (double j : result.jumps) m = std::max(m, j);
  return m;
}

double max_displacement(const GeodesicResult& result) {
  double m = 0.0;
  for (const SpacePoint& p : result.path.steps)
    m = std::max(m, euclidean_distance(p, result.path.start));
  return m;
}

BatchSummary summarize(const std::vector<SampleRecord>& records) {
  if (records.empty())
    throw std::invalid_argument("summarize: empty batch");
  for (const SampleRecord& r : records)
    if (r.n != records.front().n || r.alpha != records.front().alpha ||
        r.dim != records.front().dim)
      throw std::invalid_argument("summarize: records from mixed (n, alpha, d) cells");

  std::vector<SampleRecord> sorted = records;
  std::sort(sorted.begin(), sorted.end(),
            [](const SampleRecord& a, const SampleRecord& b) {
              return std::tie(a.sample_id, a.seed, a.passage_time, a.max_jump,
                              a.max_displacement) <
                     std::tie(b.sample_id, b.seed, b.passage_time, b.max_jump,
                              b.max_displacement);
            });

  BatchSummary s;
  s.n = sorted.front().n;
  s.alpha = sorted.front().alpha;
  s.dim = sorted.front().dim;

  std::vector<double> pt, mj, md;
  for (const SampleRecord& r : sorted) {
    if (r.boundary_hit) {
      ++s.excluded_boundary_hits;
      continue;
    }
    pt.push_back(r.passage_time);
    mj.push_back(r.max_jump);
    md.push_back(r.max_displacement);
  }
  if (pt.empty())
    throw std::invalid_argument("summarize: every record is a boundary hit");

  s.count = static_cast<std::int64_t>(pt.size());
  const double cnt = static_cast<double>(s.count);
  double var_mj = 0.0, var_md = 0.0;
  std::tie(s.mean_passage_time, s.var_passage_time) = mean_and_unbiased_var(pt);
  std::tie(s.mean_max_jump, var_mj) = mean_and_unbiased_var(mj);
  std::tie(s.mean_max_displacement, var_md) = mean_and_unbiased_var(md);
  s.stderr_passage_time = std::sqrt(s.var_passage_time / cnt);
  s.stderr_max_jump = std::sqrt(var_mj / cnt);
  s.stderr_max_displacement = std::sqrt(var_md / cnt);
  return s;
}

ExponentFit fit_exponent(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2)
    throw std::invalid_argument("fit_exponent: need at least two points");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(points[i].first > 0.0) || !(points[i].second > 0.0) ||
        !std::isfinite(points[i].second))
      throw std::invalid_argument("fit_exponent: points must be positive finite");
    if (i > 0 && !(points[i].first > points[i - 1].first))
      throw std::invalid_argument("fit_exponent: n must be strictly increasing");
  }

  ExponentFit f;
  f.points = points;
  const double x0 = std::log(points.front().first);
  const double y0 = std::log(points.front().second);
  const double x1 = std::log(points.back().first);
  const double y1 = std::log(points.back().second);
  f.slope = (y1 - y0) / (x1 - x0);
  f.intercept = y0 - f.slope * x0;

  double ss_res = 0.0, ss_tot = 0.0, ybar = 0.0;
  for (const auto& p : points) ybar += std::log(p.second);
  ybar /= static_cast<double>(points.size());
  for (const auto& p : points) {
    const double y = std::log(p.second);
    const double fit = f.intercept + f.slope * std::log(p.first);
    ss_res += (y - fit) * (y - fit);
    ss_tot += (y - ybar) * (y - ybar);
  }
  f.r_squared = ss_tot == 0.0 ? 1.0 : std::max(0.0, 1.0 - ss_res / ss_tot);
  return f;
}

TimeConstantEstimate estimate_time_constant(double alpha, int d,
                                            const std::vector<std::int64_t>& ns,
                                            int samples_per_n,
                                            std::uint64_t seed) {
  if (ns.empty() || samples_per_n <= 0)
    throw std::invalid_argument("estimate_time_constant: empty grid");
  for (std::size_t i = 0; i < ns.size(); ++i)
    if (ns[i] <= 0 || (i > 0 && ns[i] <= ns[i - 1]))
      throw std::invalid_argument(
          "estimate_time_constant: n must be positive and strictly increasing");

  TimeConstantEstimate est;
  SolverOptions opt;
  opt.alpha = alpha;
  for (std::size_t ni = 0; ni < ns.size(); ++ni) {
    const std::int64_t n = ns[ni];
    const double w = 8.0 * std::pow(static_cast<double>(n), 0.75);
    CompensatedSum acc;
    std::int64_t used = 0;
    for (int s = 0; s < samples_per_n; ++s) {
      const std::uint64_t sseed =
          mix_seed(seed, static_cast<std::uint64_t>(ni), static_cast<std::uint64_t>(s));
      const Environment env =
          sample_environment(n, d, WindowSpec{w, d}, sseed);
      const auto geo = geodesic_to_hyperplane(env, opt);
      if (!geo) continue;  // cannot happen without a cap; kept for safety
      acc.add(geo->passage_time / static_cast<double>(n));
      ++used;
    }
    if (used == 0)
      throw std::runtime_error("estimate_time_constant: no reachable samples");
    est.per_n.emplace_back(n, acc.value() / static_cast<double>(used));
  }
  est.extrapolated = est.per_n.back().second;
  return est;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string format_double(double x) { return json(x).dump(); }

const char kSampleRecordCsvHeader[] =
    "sample_id,seed,n,alpha,d,passage_time,max_jump,max_displacement,boundary_hit";

void write_records_csv(const std::vector<SampleRecord>& records,
                       std::ostream& out) {
  out << kSampleRecordCsvHeader << '\n';
  for (const SampleRecord& r : records) {
    out << r.sample_id << ',' << r.seed << ',' << r.n << ','
        << format_double(r.alpha) << ',' << r.dim << ','
        << format_double(r.passage_time) << ',' << format_double(r.max_jump)
        << ',' << format_double(r.max_displacement) << ','
        << (r.boundary_hit ? 1 : 0) << '\n';
  }
}

std::string write_records_csv(const std::vector<SampleRecord>& records) {
  std::ostringstream os;
  write_records_csv(records, os);
  return os.str();
}

std::vector<SampleRecord> read_records_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kSampleRecordCsvHeader)
    throw std::invalid_argument("read_records_csv: bad or missing header");
  std::vector<SampleRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 9)
      throw std::invalid_argument("read_records_csv: expected 9 fields, got " +
                                  std::to_string(fields.size()));
    SampleRecord r;
    r.sample_id = std::stoll(fields[0]);
    r.seed = std::stoull(fields[1]);
    r.n = std::stoll(fields[2]);
    r.alpha = std::stod(fields[3]);
    r.dim = std::stoi(fields[4]);
    r.passage_time = std::stod(fields[5]);
    r.max_jump = std::stod(fields[6]);
    r.max_displacement = std::stod(fields[7]);
    r.boundary_hit = fields[8] == "1";
    records.push_back(r);
  }
  return records;
}

std::vector<SampleRecord> read_records_csv(const std::string& text) {
  std::istringstream is(text);
  return read_records_csv(is);
}

std::string summary_to_json(const BatchSummary& s) {
  json j;
  j["n"] = s.n;
  j["alpha"] = s.alpha;
  j["d"] = s.dim;
  j["count"] = s.count;
  j["excluded_boundary_hits"] = s.excluded_boundary_hits;
  j["mean_passage_time"] = s.mean_passage_time;
  j["mean_max_jump"] = s.mean_max_jump;
  j["mean_max_displacement"] = s.mean_max_displacement;
  j["var_passage_time"] = s.var_passage_time;
  j["stderr_passage_time"] = s.stderr_passage_time;
  j["stderr_max_jump"] = s.stderr_max_jump;
  j["stderr_max_displacement"] = s.stderr_max_displacement;
  return j.dump();
}

std::string fit_to_json(const ExponentFit& f) {
  json j;
  j["slope"] = f.slope;
  j["intercept"] = f.intercept;
  j["r_squared"] = f.r_squared;
  j["points_used"] = f.points.size();
  json pts = json::array();
  for (const auto& p : f.points) pts.push_back({p.first, p.second});
  j["points"] = pts;
  return j.dump();
}

}  // namespace fpp
