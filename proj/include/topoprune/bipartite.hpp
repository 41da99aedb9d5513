#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "topoprune/layer.hpp"

namespace topoprune {

struct BipartiteEdge {
  std::size_t row = 0;
  std::size_t col = 0;
  double weight = 0.0; // normalized, in [0, 1]
};

/// Bipartite layer graph G_k with m input vertices, n output vertices and
/// magnitude-normalized edge weights. `w_max` is the normalization
/// constant; `degenerate` marks an all-zero layer (w_max == 0), which
/// carries no topological information.
struct BipartiteLayer {
  std::size_t m = 0;
  std::size_t n = 0;
  std::vector<BipartiteEdge> edges;
  double w_max = 0.0;
  bool degenerate = false;

  std::size_t flat_index(const BipartiteEdge& e) const { return e.row * n + e.col; }
};

/// Maps every matrix entry to an edge with weight |w| / w_max. The entry
/// with the largest magnitude normalizes to exactly 1. An all-zero layer
/// yields w_max = 0, all edge weights 0, and the degenerate flag.
inline BipartiteLayer normalize_weights(const LayerWeights& w) {
  validate_weights(w);
  BipartiteLayer g;
  g.m = w.rows;
  g.n = w.cols;
  g.edges.reserve(w.size());
  double w_max = 0.0;
  for (double v : w.values) w_max = std::max(w_max, std::abs(v));
  g.w_max = w_max;
  g.degenerate = (w_max == 0.0);
  for (std::size_t r = 0; r < w.rows; ++r)
    for (std::size_t c = 0; c < w.cols; ++c) {
      double a = std::abs(w.at(r, c));
      g.edges.push_back({r, c, g.degenerate ? 0.0 : a / w_max});
    }
  return g;
}

/// Same normalization but only the nonzero entries become edges. This is
/// the graph of an explicitly sparsified layer: pruned (exactly zero)
/// weights are absent, and vertices may end up isolated.
inline BipartiteLayer nonzero_graph(const LayerWeights& w) {
  validate_weights(w);
  BipartiteLayer g;
  g.m = w.rows;
  g.n = w.cols;
  double w_max = 0.0;
  for (double v : w.values) w_max = std::max(w_max, std::abs(v));
  g.w_max = w_max;
  g.degenerate = (w_max == 0.0);
  if (g.degenerate) return g;
  for (std::size_t r = 0; r < w.rows; ++r)
    for (std::size_t c = 0; c < w.cols; ++c) {
      double a = std::abs(w.at(r, c));
      if (a > 0.0) g.edges.push_back({r, c, a / w_max});
    }
  return g;
}

} // namespace topoprune
