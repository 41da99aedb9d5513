#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "topoprune/error.hpp"

namespace topoprune {

struct PersistencePoint {
  double birth = 0.0;
  double death = 0.0;
};

inline double persistence(const PersistencePoint& p) {
  return std::abs(p.death - p.birth);
}

/// Zeroth-order persistence diagram of one layer. For a super-level
/// filtration every point sits at (1, w') with w' the normalized weight
/// of the spanning-forest edge that merged two components; the essential
/// (never-dying) component of each connected piece is not recorded.
struct PersistenceDiagram {
  std::vector<PersistencePoint> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

/// p-norm of the diagram's persistences. Zero for an empty diagram.
inline double neural_persistence(const PersistenceDiagram& d, double p = 2.0) {
  if (p < 1.0)
    throw ValidationError("norm order must satisfy p >= 1, got " + std::to_string(p));
  if (d.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& pt : d.points) sum += std::pow(persistence(pt), p);
  return std::pow(sum, 1.0 / p);
}

/// NP divided by its maximum attainable value for a diagram of this size,
/// point_count^(1/p); each persistence is at most 1, so the result lies
/// in [0, 1]. Empty diagram yields 0.
inline double normalized_neural_persistence(const PersistenceDiagram& d, double p = 2.0) {
  if (d.empty()) return 0.0;
  return neural_persistence(d, p) /
         std::pow(static_cast<double>(d.size()), 1.0 / p);
}

struct NpReport {
  std::string layer_id;
  double raw_np = 0.0;
  double normalized_np = 0.0;
  std::size_t point_count = 0;
};

inline NpReport make_np_report(std::string layer_id, const PersistenceDiagram& d,
                               double p = 2.0) {
  NpReport r;
  r.layer_id = std::move(layer_id);
  r.raw_np = neural_persistence(d, p);
  r.normalized_np = normalized_neural_persistence(d, p);
  r.point_count = d.size();
  return r;
}

/// Network-level NP: the sum of raw layerwise values.
inline double total_neural_persistence(std::span<const NpReport> reports) {
  double sum = 0.0;
  for (const auto& r : reports) sum += r.raw_np;
  return sum;
}

} // namespace topoprune
