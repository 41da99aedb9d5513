#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "topoprune/error.hpp"

namespace topoprune {

/// Dense 2-D weight array of one layer, row-major. Rows index the input
/// side of the bipartite layer graph, columns the output side.
struct LayerWeights {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  LayerWeights() = default;
  LayerWeights(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), values(r * c, fill) {}
  LayerWeights(std::size_t r, std::size_t c, std::vector<double> v)
      : rows(r), cols(c), values(std::move(v)) {}

  std::size_t size() const { return rows * cols; }

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
};

/// Rejects empty shapes, shape/storage mismatches, and non-finite entries
/// (naming the flat index of the first offending value).
inline void validate_weights(const LayerWeights& w) {
  if (w.rows < 1 || w.cols < 1)
    throw ValidationError("layer must have rows >= 1 and cols >= 1, got " +
                          std::to_string(w.rows) + "x" + std::to_string(w.cols));
  if (w.values.size() != w.rows * w.cols)
    throw ValidationError("layer storage has " + std::to_string(w.values.size()) +
                          " entries, expected " + std::to_string(w.rows * w.cols));
  for (std::size_t i = 0; i < w.values.size(); ++i) {
    if (!std::isfinite(w.values[i]))
      throw ValidationError("non-finite weight at flat index " + std::to_string(i));
  }
}

} // namespace topoprune
