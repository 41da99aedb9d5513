#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "topoprune/bipartite.hpp"
#include "topoprune/error.hpp"
#include "topoprune/layer.hpp"
#include "topoprune/spanning.hpp"

namespace topoprune {

enum class LayerKind { dense, conv2d, recurrent };

inline const char* to_string(LayerKind k) {
  switch (k) {
    case LayerKind::dense: return "dense";
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::recurrent: return "recurrent";
  }
  return "?";
}

/// Declarative description of one layer, enough to evaluate the critical
/// compression ratio in closed form. Only the fields of the active kind
/// are meaningful.
struct LayerSpec {
  LayerKind kind = LayerKind::dense;
  // dense
  std::size_t in = 0, out = 0;
  // recurrent
  std::size_t hidden = 0;
  // conv2d
  std::array<std::size_t, 2> spatial{0, 0};
  std::array<std::size_t, 2> kernel{0, 0};
  std::array<std::size_t, 2> stride{1, 1};
  std::array<std::size_t, 2> pad{0, 0};
};

struct ArchSpec {
  std::vector<LayerSpec> layers;
};

inline void validate_spec(const LayerSpec& s) {
  switch (s.kind) {
    case LayerKind::dense:
      if (s.in < 1 || s.out < 1)
        throw ValidationError("dense layer dimensions must be >= 1");
      return;
    case LayerKind::recurrent:
      if (s.hidden < 1)
        throw ValidationError("recurrent layer must have hidden >= 1");
      return;
    case LayerKind::conv2d:
      for (int i = 0; i < 2; ++i) {
        if (s.spatial[i] < 1 || s.kernel[i] < 1)
          throw ValidationError("conv2d spatial and kernel dims must be >= 1");
        if (s.stride[i] < 1)
          throw ValidationError("conv2d stride must be >= 1");
        if (s.spatial[i] + 2 * s.pad[i] < s.kernel[i])
          throw ValidationError("conv2d kernel larger than padded input");
      }
      return;
  }
}

/// Display rounding used throughout reports: 5 decimals, ties to even.
inline double round5(double x) {
  return std::nearbyint(x * 1e5) / 1e5;
}

/// Critical ratio of a fully connected layer: m*n weights, m+n-1 forest
/// edges.
inline double eta_tau_dense(std::size_t m, std::size_t n) {
  if (m < 1 || n < 1) throw ValidationError("dense dimensions must be >= 1");
  return static_cast<double>(m) * static_cast<double>(n) /
         static_cast<double>(m + n - 1);
}

/// Recurrent layer with l hidden units shares one l*l weight matrix across
/// unrolled steps, so the ratio equals the dense l-by-l case.
inline double eta_tau_recurrent(std::size_t l) {
  return eta_tau_dense(l, l);
}

/// Vertex counts of the Toeplitz form of a 2-D convolution: m covers the
/// padded input, n the output grid. The output dimension per axis is
/// floor((s + 2*pad - f) / stride) + 1; `paper_literal` drops the +1 and
/// exists only to show what the uncorrected ratio would be.
inline std::pair<std::size_t, std::size_t>
conv_toeplitz_dims(const LayerSpec& s, bool paper_literal = false) {
  if (s.kind != LayerKind::conv2d)
    throw ValidationError("conv_toeplitz_dims requires a conv2d layer");
  validate_spec(s);
  std::size_t m = 1, n = 1;
  for (int i = 0; i < 2; ++i) {
    const std::size_t padded = s.spatial[i] + 2 * s.pad[i];
    m *= padded;
    std::size_t out = (padded - s.kernel[i]) / s.stride[i];
    if (!paper_literal) out += 1;
    if (out < 1)
      throw ValidationError("conv2d output dimension is 0 under the literal formula");
    n *= out;
  }
  return {m, n};
}

/// Critical ratio of a convolutional layer: the Toeplitz matrix carries
/// n*f1*f2 nonzero weights over an (m, n) bipartite vertex set.
inline double eta_tau_conv(const LayerSpec& s, bool paper_literal = false) {
  auto [m, n] = conv_toeplitz_dims(s, paper_literal);
  const double weights = static_cast<double>(n) *
                         static_cast<double>(s.kernel[0]) *
                         static_cast<double>(s.kernel[1]);
  return weights / static_cast<double>(m + n - 1);
}

struct LayerCompression {
  std::string layer_id;
  LayerKind kind;
  std::uint64_t weight_count = 0;
  std::uint64_t mst_count = 0;
  double eta_tau = 0.0;
};

struct CompressionReport {
  std::vector<LayerCompression> layers;
  std::uint64_t total_weights = 0;
  std::uint64_t total_mst = 0;
  double final_eta_tau = 0.0;
};

/// Per-layer ratios plus the network aggregate, final = sum of weight
/// counts over sum of forest sizes. Convolutions are modeled as a single
/// channel-pair Toeplitz graph.
inline CompressionReport eta_tau_network(const ArchSpec& arch,
                                         bool paper_literal = false) {
  if (arch.layers.empty())
    throw ValidationError("architecture must contain at least one layer");
  CompressionReport report;
  for (std::size_t k = 0; k < arch.layers.size(); ++k) {
    const LayerSpec& s = arch.layers[k];
    validate_spec(s);
    LayerCompression lc;
    lc.kind = s.kind;
    lc.layer_id = std::string(to_string(s.kind)) + "_" + std::to_string(k);
    switch (s.kind) {
      case LayerKind::dense:
        lc.weight_count = static_cast<std::uint64_t>(s.in) * s.out;
        lc.mst_count = s.in + s.out - 1;
        break;
      case LayerKind::recurrent:
        lc.weight_count = static_cast<std::uint64_t>(s.hidden) * s.hidden;
        lc.mst_count = 2 * s.hidden - 1;
        break;
      case LayerKind::conv2d: {
        auto [m, n] = conv_toeplitz_dims(s, paper_literal);
        lc.weight_count =
            static_cast<std::uint64_t>(n) * s.kernel[0] * s.kernel[1];
        lc.mst_count = m + n - 1;
        break;
      }
    }
    lc.eta_tau = static_cast<double>(lc.weight_count) /
                 static_cast<double>(lc.mst_count);
    report.total_weights += lc.weight_count;
    report.total_mst += lc.mst_count;
    report.layers.push_back(std::move(lc));
  }
  report.final_eta_tau = static_cast<double>(report.total_weights) /
                         static_cast<double>(report.total_mst);
  return report;
}

/// Ratio measured on actual weights: nonzero count over the size of the
/// maximum spanning forest of the nonzero graph. Matches the closed form
/// exactly when the layer is fully dense.
inline double eta_tau_empirical(const LayerWeights& w) {
  const BipartiteLayer g = nonzero_graph(w);
  if (g.degenerate)
    throw ValidationError("all-zero layer has no graph to compress");
  const SpanningForest forest = max_spanning_forest(g);
  return static_cast<double>(g.edges.size()) /
         static_cast<double>(forest.edges.size());
}

} // namespace topoprune
