#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "topoprune/bipartite.hpp"
#include "topoprune/persistence.hpp"
#include "topoprune/union_find.hpp"

namespace topoprune {

struct ForestEdge {
  std::size_t row = 0;
  std::size_t col = 0;
  double weight = 0.0;    // normalized
  std::size_t flat = 0;   // row * n + col
};

struct SpanningForest {
  std::vector<ForestEdge> edges; // in acceptance order (weight descending)
  std::size_t components_before = 0;
  std::size_t components_after = 0;
};

namespace detail {

// Deterministic Kruskal order: weight descending, then row-major flat
// index ascending among equal weights.
inline std::vector<ForestEdge> sorted_edges(const BipartiteLayer& g) {
  std::vector<ForestEdge> edges;
  edges.reserve(g.edges.size());
  for (const auto& e : g.edges)
    edges.push_back({e.row, e.col, e.weight, e.row * g.n + e.col});
  std::sort(edges.begin(), edges.end(), [](const ForestEdge& a, const ForestEdge& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.flat < b.flat;
  });
  return edges;
}

} // namespace detail

/// Kruskal maximum spanning forest of the layer graph. For a complete
/// bipartite layer the forest is a tree with m + n - 1 edges; in general
/// it has m + n - #components edges. The edge-weight multiset is the
/// same for every maximum spanning forest, so the result is canonical
/// even though the edge set under ties depends on the ordering rule.
inline SpanningForest max_spanning_forest(const BipartiteLayer& g) {
  SpanningForest forest;
  forest.components_before = g.m + g.n;
  UnionFind uf(g.m + g.n);
  for (const auto& e : detail::sorted_edges(g)) {
    if (uf.unite(e.row, g.m + e.col)) {
      forest.edges.push_back(e);
      if (uf.components() == 1) break;
    }
  }
  forest.components_after = forest.components_before - forest.edges.size();
  return forest;
}

/// Runs the super-level-set filtration: all m + n vertices are present at
/// threshold 1, and as the threshold decreases each forest edge merges two
/// components, producing the point (1, w'). Cycle-closing edges change
/// nothing. One essential component per connected piece survives and is
/// excluded from the diagram. A degenerate (all-zero) layer carries no
/// information: its points collapse to (0, 0).
inline PersistenceDiagram superlevel_filtration(const BipartiteLayer& g) {
  const SpanningForest forest = max_spanning_forest(g);
  PersistenceDiagram d;
  d.points.reserve(forest.edges.size());
  for (const auto& e : forest.edges) {
    if (g.degenerate)
      d.points.push_back({0.0, 0.0});
    else
      d.points.push_back({1.0, e.weight});
  }
  return d;
}

} // namespace topoprune
