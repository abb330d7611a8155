#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "fpp/geodesic.hpp"

namespace fpp {

// One solved sample of a batch.
struct SampleRecord {
  std::int64_t sample_id = 0;
  std::uint64_t seed = 0;
  std::int64_t n = 0;
  double alpha = 1.0;
  int dim = 1;
  double passage_time = 0.0;
  double max_jump = 0.0;
  double max_displacement = 0.0;
  bool boundary_hit = false;
};

// Aggregates of one (alpha, n) cell.  Boundary-hit records are excluded from
// every aggregate; their number is reported separately.
struct BatchSummary {
  std::int64_t n = 0;
  double alpha = 1.0;
  int dim = 1;
  std::int64_t count = 0;
  std::int64_t excluded_boundary_hits = 0;
  double mean_passage_time = 0.0;
  double mean_max_jump = 0.0;
  double mean_max_displacement = 0.0;
  double var_passage_time = 0.0;  // unbiased sample variance
  double stderr_passage_time = 0.0;
  double stderr_max_jump = 0.0;
  double stderr_max_displacement = 0.0;
};

// Power-law exponent read off a log-log plot of (n, value) points.
struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;   // in log space: ln value = intercept + slope * ln n
  double r_squared = 0.0;   // fit quality of that line over all points, in [0, 1]
  std::vector<std::pair<double, double>> points;  // the (n, value) pairs used
};

struct TimeConstantEstimate {
  std::vector<std::pair<std::int64_t, double>> per_n;  // (n, mean T_n / n)
  // Mean at the largest n.  By subadditivity the finite-n mean only decreases
  // with n, so this estimates the limiting constant from above.
  double extrapolated = 0.0;
};

// Largest single-jump length of a solved path.
double max_jump(const GeodesicResult& result);

// Largest distance of any path point from the start point.
double max_displacement(const GeodesicResult& result);

// Aggregates a batch of records sharing one (n, alpha, d) cell.  Records are
// first brought into canonical order (by sample_id, then remaining fields)
// and then accumulated with compensated summation, so the result is exactly
// invariant under permutations of the input.  Throws std::invalid_argument on
// an empty batch, mixed cells, or when every record is a boundary hit.
BatchSummary summarize(const std::vector<SampleRecord>& records);

// Fits ln value = intercept + slope * ln n.  The slope is taken between the
// first and last points (the extreme sample sizes) -- the way an exponent is
// read off a log-log plot -- and r_squared reports how well that line
// explains all points.  Requires >= 2 points, strictly increasing positive n,
// and positive values.
ExponentFit fit_exponent(const std::vector<std::pair<double, double>>& points);

// Monte Carlo estimate of the limiting passage time per layer: solves
// samples_per_n independent environments for each n (per-sample seeds are
// derived from (seed, n-index, sample-index)) and averages T_n / n.
TimeConstantEstimate estimate_time_constant(double alpha, int d,
                                            const std::vector<std::int64_t>& ns,
                                            int samples_per_n,
                                            std::uint64_t seed);

// CSV layout:
//   sample_id,seed,n,alpha,d,passage_time,max_jump,max_displacement,boundary_hit
// Floating-point fields use shortest round-trip notation, so
// read(write(records)) reproduces every value exactly.
extern const char kSampleRecordCsvHeader[];
void write_records_csv(const std::vector<SampleRecord>& records,
                       std::ostream& out);
std::string write_records_csv(const std::vector<SampleRecord>& records);
std::vector<SampleRecord> read_records_csv(std::istream& in);
std::vector<SampleRecord> read_records_csv(const std::string& text);

// JSON object views (for reports and manifests).
std::string summary_to_json(const BatchSummary& s);
std::string fit_to_json(const ExponentFit& f);

// Shortest decimal form that parses back to exactly the same double; used by
// every text serializer in the library so outputs are byte-stable.
std::string format_double(double x);

}  // namespace fpp
