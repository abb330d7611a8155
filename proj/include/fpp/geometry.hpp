#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace fpp {

// A spatial location is a d-vector of coordinates.  Hot loops work on flat
// coordinate arrays instead (see Layer), this type is for API boundaries.
using SpacePoint = std::vector<double>;

// Euclidean distance between two points stored in flat arrays.
// Summation is left-to-right so every caller computes bit-identical values.
inline double euclidean_distance(const double* a, const double* b, int dim) {
  if (dim == 1) return std::fabs(a[0] - b[0]);
  double s = 0.0;
  for (int i = 0; i < dim; ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return std::sqrt(s);
}

inline double euclidean_distance(const SpacePoint& a, const SpacePoint& b) {
  return euclidean_distance(a.data(), b.data(), static_cast<int>(a.size()));
}

inline double euclidean_norm(const SpacePoint& a) {
  double s = 0.0;
  for (double c : a) s += c * c;
  return std::sqrt(s);
}

// Cost of a jump of length t under exponent alpha, i.e. t^alpha.
// The common exponents bypass std::pow: they are much cheaper and this
// function sits in the innermost loop of every solver.
inline double jump_cost(double t, double alpha) {
  if (alpha == 1.0) return t;
  if (alpha == 2.0) return t * t;
  if (alpha == 0.5) return std::sqrt(t);
  return std::pow(t, alpha);
}

// Lexicographic comparison of two points in flat storage.
inline int lex_compare(const double* a, const double* b, int dim) {
  for (int i = 0; i < dim; ++i) {
    if (a[i] < b[i]) return -1;
    if (a[i] > b[i]) return 1;
  }
  return 0;
}

}  // namespace fpp
