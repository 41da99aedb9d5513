#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "topoprune/bipartite.hpp"
#include "topoprune/error.hpp"
#include "topoprune/persistence.hpp"
#include "topoprune/pruning.hpp"
#include "topoprune/spanning.hpp"
#include "topoprune/trainer.hpp"

namespace topoprune {

enum class LoopKind { imp, timp };

inline const char* to_string(LoopKind k) {
  return k == LoopKind::imp ? "imp" : "timp";
}

struct LayerRoundMetrics {
  std::string layer_id;
  std::size_t keep = 0;
  std::size_t nnz = 0;
  double sparsity = 0.0; // fraction of weights pruned
  double np_pre_mask = 0.0;
  double np_post_mask = 0.0;
  double normalized_np_post = 0.0;
  double overlap_x = 0.0; // MST vs top-alpha of the trained weights
};

struct RoundMetrics {
  std::size_t round = 0;
  std::vector<LayerRoundMetrics> layers;
  double total_np_pre = 0.0;
  double total_np_post = 0.0;
  double train_loss = 0.0; // final batch loss of the round
  double val_loss = 0.0;
};

/// One trainer invocation: run `iterations` steps on `net`, honoring its
/// masks, and report the loss trajectory.
using TrainRoundFn = std::function<TrainResult(DenseNet&, std::size_t iterations)>;
/// Validation loss of the current network.
using EvalFn = std::function<double(const DenseNet&)>;

/// Alternates training and pruning per the schedule. Every round trains,
/// measures NP and MST/top-alpha overlap on the freshly trained weights,
/// then installs this round's mask (magnitude or topology-preserving).
/// A schedule that falls below any layer's forest size aborts before
/// training when the loop is T-IMP; magnitude pruning proceeds and the
/// schedule's warning is preserved in the report instead.
inline std::vector<RoundMetrics> run_iterative(LoopKind loop, DenseNet& net,
                                               const ImpSchedule& schedule,
                                               const TrainRoundFn& train_round,
                                               const EvalFn& evaluate,
                                               double np_order = 2.0) {
  if (schedule.keep_counts.size() != schedule.rounds)
    throw ValidationError("schedule rounds do not match keep-count table");
  if (schedule.layer_sizes.size() != net.layer_count())
    throw ValidationError("schedule layer count does not match network");
  if (loop == LoopKind::timp && !schedule.feasible_for_timp) {
    std::string msg = "T-IMP schedule infeasible";
    for (const auto& w : schedule.warnings) msg += "; " + w;
    throw InfeasibleScheduleError(msg);
  }

  std::vector<RoundMetrics> rounds;
  for (std::size_t r = 0; r < schedule.rounds; ++r) {
    RoundMetrics metrics;
    metrics.round = r + 1;

    const TrainResult tr =
        train_round(net, schedule.train_iterations_per_round);
    metrics.train_loss =
        tr.loss_trajectory.empty() ? 0.0 : tr.loss_trajectory.back();

    for (std::size_t k = 0; k < net.layer_count(); ++k) {
      LayerRoundMetrics lm;
      lm.layer_id = "layer_" + std::to_string(k);
      lm.keep = schedule.keep_counts[r][k];

      const LayerWeights& trained = net.weights(k);
      lm.np_pre_mask =
          neural_persistence(superlevel_filtration(normalize_weights(trained)),
                             np_order);
      lm.overlap_x = measure_overlap(trained, lm.layer_id).fraction;

      PruneMask mask = (loop == LoopKind::imp)
                           ? magnitude_mask(trained, lm.keep)
                           : timp_mask(trained, lm.keep);
      net.set_mask(k, std::move(mask));

      const LayerWeights& masked = net.weights(k);
      const PersistenceDiagram d =
          superlevel_filtration(normalize_weights(masked));
      lm.np_post_mask = neural_persistence(d, np_order);
      lm.normalized_np_post = normalized_neural_persistence(d, np_order);
      lm.nnz = net.mask(k)->nnz;
      lm.sparsity = 1.0 - static_cast<double>(lm.nnz) /
                              static_cast<double>(trained.size());
      metrics.total_np_pre += lm.np_pre_mask;
      metrics.total_np_post += lm.np_post_mask;
      metrics.layers.push_back(std::move(lm));
    }

    metrics.val_loss = evaluate(net);
    rounds.push_back(std::move(metrics));
  }
  return rounds;
}

} // namespace topoprune
