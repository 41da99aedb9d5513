#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "topoprune/bipartite.hpp"
#include "topoprune/compression.hpp"
#include "topoprune/error.hpp"
#include "topoprune/layer.hpp"
#include "topoprune/spanning.hpp"

namespace topoprune {

enum class MaskMethod { mp, timp };

inline const char* to_string(MaskMethod m) {
  return m == MaskMethod::mp ? "mp" : "timp";
}

/// Binary keep/prune mask aligned to one weight matrix.
struct PruneMask {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> bits; // row-major, 1 = keep
  std::size_t nnz = 0;
  MaskMethod method = MaskMethod::mp;

  bool keeps(std::size_t r, std::size_t c) const { return bits[r * cols + c] != 0; }
};

inline LayerWeights apply_mask(const LayerWeights& w, const PruneMask& mask) {
  if (mask.rows != w.rows || mask.cols != w.cols)
    throw ValidationError("mask shape does not match weights");
  LayerWeights out = w;
  for (std::size_t i = 0; i < out.values.size(); ++i)
    if (!mask.bits[i]) out.values[i] = 0.0;
  return out;
}

namespace detail {

// Flat indices ordered by |w| descending, row-major index ascending among
// ties. The total order makes masks nested across keep counts.
inline std::vector<std::size_t> magnitude_order(const LayerWeights& w) {
  std::vector<std::size_t> idx(w.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const double wa = std::abs(w.values[a]), wb = std::abs(w.values[b]);
    if (wa != wb) return wa > wb;
    return a < b;
  });
  return idx;
}

} // namespace detail

/// Keeps the `keep` entries of largest magnitude (local, per-layer
/// scoring).
inline PruneMask magnitude_mask(const LayerWeights& w, std::size_t keep) {
  validate_weights(w);
  if (keep > w.size())
    throw ValidationError("keep = " + std::to_string(keep) + " exceeds layer size " +
                          std::to_string(w.size()));
  PruneMask mask;
  mask.rows = w.rows;
  mask.cols = w.cols;
  mask.bits.assign(w.size(), 0);
  mask.method = MaskMethod::mp;
  const auto order = detail::magnitude_order(w);
  for (std::size_t i = 0; i < keep; ++i) mask.bits[order[i]] = 1;
  mask.nnz = keep;
  return mask;
}

/// Topology-preserving mask: always retains the maximum spanning forest of
/// the nonzero graph (alpha edges), then fills the remaining keep - alpha
/// slots with the largest-magnitude non-forest weights. keep < alpha is
/// rejected unless `truncate` is set, in which case the keep forest edges
/// of largest persistence (smallest normalized weight) are retained; that
/// mode no longer preserves topology and is flagged by callers.
inline PruneMask timp_mask(const LayerWeights& w, std::size_t keep,
                           bool truncate = false) {
  validate_weights(w);
  if (keep > w.size())
    throw ValidationError("keep = " + std::to_string(keep) + " exceeds layer size " +
                          std::to_string(w.size()));
  const BipartiteLayer g = nonzero_graph(w);
  if (g.degenerate)
    throw ValidationError("all-zero layer cannot be pruned topologically");
  const SpanningForest forest = max_spanning_forest(g);
  const std::size_t alpha = forest.edges.size();

  PruneMask mask;
  mask.rows = w.rows;
  mask.cols = w.cols;
  mask.bits.assign(w.size(), 0);
  mask.method = MaskMethod::timp;

  if (keep < alpha) {
    if (!truncate)
      throw ValidationError("keep = " + std::to_string(keep) +
                            " is below the spanning forest size alpha = " +
                            std::to_string(alpha) +
                            "; topology cannot be preserved (pass --truncate to "
                            "keep the most persistent forest edges instead)");
    std::vector<ForestEdge> edges = forest.edges;
    std::sort(edges.begin(), edges.end(), [](const ForestEdge& a, const ForestEdge& b) {
      if (a.weight != b.weight) return a.weight < b.weight; // larger persistence first
      return a.flat < b.flat;
    });
    for (std::size_t i = 0; i < keep; ++i) mask.bits[edges[i].flat] = 1;
    mask.nnz = keep;
    return mask;
  }

  for (const auto& e : forest.edges) mask.bits[e.flat] = 1;
  std::size_t remaining = keep - alpha;
  if (remaining > 0) {
    for (std::size_t flat : detail::magnitude_order(w)) {
      if (mask.bits[flat]) continue;
      mask.bits[flat] = 1;
      if (--remaining == 0) break;
    }
  }
  mask.nnz = keep;
  return mask;
}

enum class ScheduleBasis { percent_of_original, percent_of_remaining };

/// Iterative pruning schedule: absolute keep-counts per round per layer.
struct ImpSchedule {
  double target_sparsity_percent = 0.0;
  std::size_t rounds = 0;
  std::size_t train_iterations_per_round = 0;
  std::vector<std::size_t> layer_sizes;
  std::vector<std::size_t> layer_alphas; // m + n - 1 per layer
  std::vector<std::vector<std::size_t>> keep_counts; // [round][layer]
  bool feasible_for_timp = true;
  std::vector<std::string> warnings;
};

namespace detail {

// count * (1 - r*p/(100N)) with the subtraction done on exactly
// representable integers first, so integral results stay integral.
inline double schedule_quota(std::size_t count, double p, std::size_t rounds,
                             std::size_t r) {
  const double denom = 100.0 * static_cast<double>(rounds);
  const double numer = denom - static_cast<double>(r) * p;
  const double q = static_cast<double>(count) * numer / denom;
  const double nearest = std::round(q);
  return (std::abs(q - nearest) < 1e-6) ? nearest : std::ceil(q);
}

} // namespace detail

/// Round r keeps ceil(count * (1 - r*p/(100*N))) weights of each layer:
/// every round removes p/N percent of the layer's original parameter
/// count. Rounds whose quota falls below the layer's forest size are
/// flagged as infeasible for T-IMP. Alternative basis: remove p/N percent
/// of the count remaining from the previous round.
inline ImpSchedule build_imp_schedule(
    std::span<const std::pair<std::size_t, std::size_t>> layer_shapes, double p,
    std::size_t rounds, std::size_t train_iterations,
    ScheduleBasis basis = ScheduleBasis::percent_of_original) {
  if (!(p > 0.0 && p < 100.0))
    throw ValidationError("target sparsity percent must satisfy 0 < p < 100");
  if (rounds < 1) throw ValidationError("rounds must be >= 1");
  if (train_iterations < 1) throw ValidationError("train iterations must be >= 1");
  if (layer_shapes.empty()) throw ValidationError("schedule needs at least one layer");

  ImpSchedule sched;
  sched.target_sparsity_percent = p;
  sched.rounds = rounds;
  sched.train_iterations_per_round = train_iterations;
  for (auto [m, n] : layer_shapes) {
    if (m < 1 || n < 1) throw ValidationError("layer dimensions must be >= 1");
    sched.layer_sizes.push_back(m * n);
    sched.layer_alphas.push_back(m + n - 1);
  }

  std::vector<std::size_t> previous = sched.layer_sizes;
  for (std::size_t r = 1; r <= rounds; ++r) {
    std::vector<std::size_t> keeps;
    for (std::size_t k = 0; k < sched.layer_sizes.size(); ++k) {
      double q;
      if (basis == ScheduleBasis::percent_of_original) {
        q = detail::schedule_quota(sched.layer_sizes[k], p, rounds, r);
      } else {
        q = detail::schedule_quota(previous[k], p, rounds, 1);
      }
      const auto keep = static_cast<std::size_t>(q);
      if (keep >= previous[k])
        throw ValidationError(
            "schedule is not strictly decreasing: layer " + std::to_string(k) +
            " would keep " + std::to_string(keep) + " of " +
            std::to_string(previous[k]) + " at round " + std::to_string(r) +
            "; increase p/N or the layer size");
      if (keep < sched.layer_alphas[k]) {
        sched.feasible_for_timp = false;
        sched.warnings.push_back(
            "layer " + std::to_string(k) + " round " + std::to_string(r) +
            ": keep " + std::to_string(keep) + " is below alpha " +
            std::to_string(sched.layer_alphas[k]) +
            " (compression beyond the critical ratio; T-IMP infeasible)");
      }
      keeps.push_back(keep);
    }
    previous = keeps;
    sched.keep_counts.push_back(std::move(keeps));
  }
  return sched;
}

/// MST / top-alpha comparison of one layer.
struct OverlapReport {
  std::string layer_id;
  std::size_t alpha = 0;
  std::size_t overlap_count = 0;
  double fraction = 0.0;
  std::vector<double> mst_weights;       // normalized, descending
  std::vector<double> top_alpha_weights; // normalized, descending
};

/// X = |top-alpha by magnitude  intersect  spanning forest| / alpha, with
/// alpha the forest size (m + n - 1 for a dense layer). Also exports both
/// normalized weight lists for plotting.
inline OverlapReport measure_overlap(const LayerWeights& w,
                                     std::string_view layer_id = "") {
  const BipartiteLayer g = nonzero_graph(w);
  if (g.degenerate)
    throw ValidationError("all-zero layer has no overlap to measure");
  const SpanningForest forest = max_spanning_forest(g);

  OverlapReport report;
  report.layer_id = std::string(layer_id);
  report.alpha = forest.edges.size();

  auto order = detail::sorted_edges(g); // weight desc, flat asc
  std::unordered_set<std::size_t> mst_flats;
  mst_flats.reserve(forest.edges.size() * 2);
  for (const auto& e : forest.edges) mst_flats.insert(e.flat);

  for (std::size_t i = 0; i < report.alpha; ++i) {
    report.top_alpha_weights.push_back(order[i].weight);
    if (mst_flats.contains(order[i].flat)) ++report.overlap_count;
  }
  report.fraction = static_cast<double>(report.overlap_count) /
                    static_cast<double>(report.alpha);

  report.mst_weights.reserve(forest.edges.size());
  for (const auto& e : forest.edges) report.mst_weights.push_back(e.weight);
  std::sort(report.mst_weights.begin(), report.mst_weights.end(),
            std::greater<>());
  return report;
}

} // namespace topoprune
