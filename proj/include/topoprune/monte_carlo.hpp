#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "topoprune/error.hpp"
#include "topoprune/layer.hpp"
#include "topoprune/pruning.hpp"
#include "topoprune/rng.hpp"

namespace topoprune {

enum class WeightDist { uniform01, gaussian_abs };

inline const char* to_string(WeightDist d) {
  return d == WeightDist::uniform01 ? "uniform01" : "gaussian-abs";
}

struct OverlapEstimate {
  std::size_t m = 0, n = 0;
  WeightDist dist = WeightDist::uniform01;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  double mean_overlap = 0.0;
  double std_dev = 0.0;   // sample standard deviation
  double std_error = 0.0; // std_dev / sqrt(trials)
  std::vector<double> per_trial;
};

/// Draws i.i.d. random layers and measures the MST / top-alpha overlap
/// fraction of each. Trial t uses the substream (seed, t), so results are
/// independent of evaluation order and bit-identical for a fixed seed.
inline OverlapEstimate monte_carlo_overlap(std::size_t m, std::size_t n,
                                           WeightDist dist, std::size_t trials,
                                           std::uint64_t seed) {
  if (m < 1 || n < 1) throw ValidationError("m and n must be >= 1");
  if (trials < 1) throw ValidationError("trials must be >= 1");

  OverlapEstimate est;
  est.m = m;
  est.n = n;
  est.dist = dist;
  est.trials = trials;
  est.seed = seed;
  est.per_trial.reserve(trials);

  for (std::size_t t = 0; t < trials; ++t) {
    CounterRng rng(seed, t);
    LayerWeights w(m, n);
    for (double& v : w.values)
      v = (dist == WeightDist::uniform01) ? rng.uniform01()
                                          : std::abs(rng.gaussian());
    est.per_trial.push_back(measure_overlap(w).fraction);
  }

  double sum = 0.0;
  for (double x : est.per_trial) sum += x;
  est.mean_overlap = sum / static_cast<double>(trials);
  if (trials > 1) {
    double ss = 0.0;
    for (double x : est.per_trial) {
      const double d = x - est.mean_overlap;
      ss += d * d;
    }
    est.std_dev = std::sqrt(ss / static_cast<double>(trials - 1));
    est.std_error = est.std_dev / std::sqrt(static_cast<double>(trials));
  }
  return est;
}

} // namespace topoprune
