#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "topoprune/error.hpp"

namespace topoprune {

/// Lower bound on the expected fraction of the maximum spanning tree that
/// the top-alpha weights of a complete bipartite layer hit, with
/// alpha = m + n - 1:
///
///   E[X] >= (1 / (m+n-1)) * sum_{i=0..j} (m-i)(n-i) / (m*n - i),
///   j = min(m, n); the bound is exactly 1 when j = 1.
inline double overlap_lower_bound(std::size_t m, std::size_t n) {
  if (m < 1 || n < 1) throw ValidationError("m and n must be >= 1");
  const std::size_t j = std::min(m, n);
  if (j == 1) return 1.0;
  const double mn = static_cast<double>(m) * static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t i = 0; i <= j; ++i) {
    sum += (static_cast<double>(m - i) * static_cast<double>(n - i)) /
           (mn - static_cast<double>(i));
  }
  return sum / static_cast<double>(m + n - 1);
}

/// Same bound when only a fraction p of the m*n weights is nonzero (all
/// vertices assumed still connected): the denominator becomes p*m*n - i
/// and the result is clamped to 1. Reduces to the dense bound at p = 1.
inline double overlap_lower_bound_sparse(std::size_t m, std::size_t n, double p) {
  if (m < 1 || n < 1) throw ValidationError("m and n must be >= 1");
  if (!(p > 0.0 && p <= 1.0))
    throw ValidationError("sparsity fraction must satisfy 0 < p <= 1, got " +
                          std::to_string(p));
  const double mn = static_cast<double>(m) * static_cast<double>(n);
  const double alpha = static_cast<double>(m + n - 1);
  if (p * mn < alpha)
    throw ValidationError("p*m*n = " + std::to_string(p * mn) +
                          " is below the forest size " + std::to_string(m + n - 1) +
                          "; a spanning tree cannot exist");
  const std::size_t j = std::min(m, n);
  if (j == 1) return 1.0;
  double sum = 0.0;
  for (std::size_t i = 0; i <= j; ++i) {
    sum += (static_cast<double>(m - i) * static_cast<double>(n - i)) /
           (p * mn - static_cast<double>(i));
  }
  return std::min(1.0, sum / alpha);
}

namespace detail {

inline double log_binomial(std::size_t n, std::size_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

} // namespace detail

/// Probability that two independent uniformly random alpha-subsets of the
/// m*n weights share exactly w elements:
///
///   C(alpha, w) * (alpha/mn)^w * ((mn-alpha)/mn)^(alpha-w)
///
/// Evaluated in log space; C(883, 44) and friends overflow otherwise.
inline double random_overlap_pmf(std::size_t m, std::size_t n, std::size_t alpha,
                                 std::size_t w) {
  if (m < 1 || n < 1) throw ValidationError("m and n must be >= 1");
  const std::size_t mn = m * n;
  if (alpha > mn) throw ValidationError("alpha exceeds the number of weights");
  if (w > alpha) throw ValidationError("w exceeds alpha");
  if (alpha == mn) return w == alpha ? 1.0 : 0.0;
  if (alpha == 0) return w == 0 ? 1.0 : 0.0;
  const double log_hit = std::log(static_cast<double>(alpha) / static_cast<double>(mn));
  const double log_miss =
      std::log(static_cast<double>(mn - alpha) / static_cast<double>(mn));
  double lp = detail::log_binomial(alpha, w);
  if (w > 0) lp += static_cast<double>(w) * log_hit;
  if (alpha - w > 0) lp += static_cast<double>(alpha - w) * log_miss;
  return std::exp(lp);
}

/// Probability of at least w shared elements: the pmf tail. Certain event
/// at w = 0.
inline double random_overlap_tail(std::size_t m, std::size_t n, std::size_t alpha,
                                  std::size_t w) {
  if (w == 0) return 1.0;
  double sum = 0.0, comp = 0.0; // Kahan
  for (std::size_t i = w; i <= alpha; ++i) {
    const double y = random_overlap_pmf(m, n, alpha, i) - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return std::min(1.0, sum);
}

/// "w% overlap" phrased as a count: floor(fraction * alpha).
inline std::size_t overlap_count_from_fraction(double fraction, std::size_t alpha) {
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw ValidationError("overlap fraction must lie in [0, 1]");
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(alpha)));
}

} // namespace topoprune
