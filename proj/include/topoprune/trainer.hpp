#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "topoprune/dataset.hpp"
#include "topoprune/error.hpp"
#include "topoprune/layer.hpp"
#include "topoprune/pruning.hpp"
#include "topoprune/rng.hpp"

namespace topoprune {

enum class Activation { relu, tanh };

inline const char* to_string(Activation a) {
  return a == Activation::relu ? "relu" : "tanh";
}

struct TrainConfig {
  std::uint64_t seed = 0;
  double learning_rate = 0.1;
  std::size_t batch_size = 32;
  std::size_t iterations = 500;
};

/// Fully connected classifier: hidden activations relu or tanh, softmax
/// output, per-layer optional pruning masks. Masked weights are exactly
/// zero at every point outside the backward pass; the mask is re-applied
/// after each optimizer step.
class DenseNet {
public:
  DenseNet(std::span<const std::size_t> dims, Activation hidden,
           std::uint64_t seed)
      : hidden_(hidden), seed_(seed) {
    if (dims.size() < 2)
      throw ValidationError("network needs at least one layer (two dims)");
    for (std::size_t d : dims)
      if (d < 1) throw ValidationError("layer widths must be >= 1");
    dims_.assign(dims.begin(), dims.end());
    for (std::size_t k = 0; k + 1 < dims_.size(); ++k) {
      CounterRng rng(seed, k);
      const double bound = 1.0 / std::sqrt(static_cast<double>(dims_[k]));
      LayerWeights w(dims_[k], dims_[k + 1]);
      for (double& v : w.values) v = bound * (2.0 * rng.uniform01() - 1.0);
      weights_.push_back(std::move(w));
      biases_.emplace_back(dims_[k + 1], 0.0);
      masks_.emplace_back();
    }
  }

  std::size_t layer_count() const { return weights_.size(); }
  const std::vector<std::size_t>& dims() const { return dims_; }
  Activation hidden_activation() const { return hidden_; }
  std::uint64_t seed() const { return seed_; }

  const LayerWeights& weights(std::size_t k) const { return weights_[k]; }
  LayerWeights& weights_mut(std::size_t k) { return weights_[k]; }
  const std::vector<double>& bias(std::size_t k) const { return biases_[k]; }
  std::vector<double>& bias_mut(std::size_t k) { return biases_[k]; }
  const std::optional<PruneMask>& mask(std::size_t k) const { return masks_[k]; }

  /// Installs a mask and immediately zeroes the pruned weights.
  void set_mask(std::size_t k, PruneMask mask) {
    if (mask.rows != weights_[k].rows || mask.cols != weights_[k].cols)
      throw ValidationError("mask shape does not match layer " + std::to_string(k));
    masks_[k] = std::move(mask);
    pin_masked(k);
  }

  void clear_mask(std::size_t k) { masks_[k].reset(); }

  void pin_masked(std::size_t k) {
    if (!masks_[k]) return;
    auto& w = weights_[k];
    const auto& bits = masks_[k]->bits;
    for (std::size_t i = 0; i < w.values.size(); ++i)
      if (!bits[i]) w.values[i] = 0.0;
  }

  struct Forward {
    // acts[0] is the input batch; acts[k+1] the output of layer k.
    // The final entry holds softmax probabilities.
    std::vector<std::vector<double>> acts;
    std::size_t count = 0;
  };

  Forward forward(const Minibatch& batch) const {
    if (batch.feature_dim != dims_.front())
      throw ValidationError("batch feature width " + std::to_string(batch.feature_dim) +
                            " does not match input dim " +
                            std::to_string(dims_.front()));
    Forward f;
    f.count = batch.count;
    f.acts.resize(layer_count() + 1);
    f.acts[0] = batch.features;
    for (std::size_t k = 0; k < layer_count(); ++k) {
      const auto& w = weights_[k];
      const auto& b = biases_[k];
      const auto& in = f.acts[k];
      auto& out = f.acts[k + 1];
      out.assign(batch.count * w.cols, 0.0);
      for (std::size_t s = 0; s < batch.count; ++s) {
        const double* x = in.data() + s * w.rows;
        double* z = out.data() + s * w.cols;
        for (std::size_t j = 0; j < w.cols; ++j) z[j] = b[j];
        for (std::size_t i = 0; i < w.rows; ++i) {
          const double xi = x[i];
          if (xi == 0.0) continue;
          const double* wrow = w.values.data() + i * w.cols;
          for (std::size_t j = 0; j < w.cols; ++j) z[j] += xi * wrow[j];
        }
        if (k + 1 < layer_count()) {
          for (std::size_t j = 0; j < w.cols; ++j)
            z[j] = hidden_ == Activation::relu ? std::max(0.0, z[j]) : std::tanh(z[j]);
        } else {
          softmax_row(z, w.cols);
        }
      }
    }
    return f;
  }

  /// Mean cross-entropy of the cached forward pass.
  double mean_loss(const Forward& f, const Minibatch& batch) const {
    const std::size_t classes = dims_.back();
    double sum = 0.0;
    for (std::size_t s = 0; s < batch.count; ++s) {
      const double p = f.acts.back()[s * classes + batch.labels[s]];
      sum += -std::log(std::max(p, 1e-300));
    }
    return sum / static_cast<double>(batch.count);
  }

  struct Gradients {
    std::vector<LayerWeights> dw;
    std::vector<std::vector<double>> db;
  };

  /// Gradients of the mean cross-entropy; masked coordinates are zeroed so
  /// the following update cannot revive pruned weights.
  Gradients backward(const Forward& f, const Minibatch& batch) const {
    Gradients g;
    g.dw.reserve(layer_count());
    g.db.reserve(layer_count());
    for (std::size_t k = 0; k < layer_count(); ++k) {
      g.dw.emplace_back(weights_[k].rows, weights_[k].cols);
      g.db.emplace_back(weights_[k].cols, 0.0);
    }
    const std::size_t classes = dims_.back();
    const double inv = 1.0 / static_cast<double>(batch.count);

    // dL/dz of the softmax cross-entropy output layer.
    std::vector<double> delta(batch.count * classes);
    for (std::size_t s = 0; s < batch.count; ++s)
      for (std::size_t j = 0; j < classes; ++j) {
        const double y = (j == batch.labels[s]) ? 1.0 : 0.0;
        delta[s * classes + j] = (f.acts.back()[s * classes + j] - y) * inv;
      }

    for (std::size_t k = layer_count(); k-- > 0;) {
      const auto& w = weights_[k];
      const auto& in = f.acts[k];
      for (std::size_t s = 0; s < batch.count; ++s) {
        const double* x = in.data() + s * w.rows;
        const double* dz = delta.data() + s * w.cols;
        for (std::size_t j = 0; j < w.cols; ++j) g.db[k][j] += dz[j];
        for (std::size_t i = 0; i < w.rows; ++i) {
          if (x[i] == 0.0) continue;
          double* grow = g.dw[k].values.data() + i * w.cols;
          for (std::size_t j = 0; j < w.cols; ++j) grow[j] += x[i] * dz[j];
        }
      }
      if (k > 0) {
        std::vector<double> prev(batch.count * w.rows, 0.0);
        for (std::size_t s = 0; s < batch.count; ++s) {
          const double* dz = delta.data() + s * w.cols;
          const double* a = in.data() + s * w.rows;
          double* dp = prev.data() + s * w.rows;
          for (std::size_t i = 0; i < w.rows; ++i) {
            double acc = 0.0;
            const double* wrow = w.values.data() + i * w.cols;
            for (std::size_t j = 0; j < w.cols; ++j) acc += wrow[j] * dz[j];
            // Activation derivative at the stored activation value.
            if (hidden_ == Activation::relu)
              dp[i] = a[i] > 0.0 ? acc : 0.0;
            else
              dp[i] = acc * (1.0 - a[i] * a[i]);
          }
        }
        delta = std::move(prev);
      }
      if (masks_[k]) {
        const auto& bits = masks_[k]->bits;
        for (std::size_t i = 0; i < g.dw[k].values.size(); ++i)
          if (!bits[i]) g.dw[k].values[i] = 0.0;
      }
    }
    return g;
  }

  void sgd_step(const Gradients& g, double lr) {
    for (std::size_t k = 0; k < layer_count(); ++k) {
      auto& w = weights_[k];
      for (std::size_t i = 0; i < w.values.size(); ++i)
        w.values[i] -= lr * g.dw[k].values[i];
      for (std::size_t j = 0; j < biases_[k].size(); ++j)
        biases_[k][j] -= lr * g.db[k][j];
      pin_masked(k);
    }
  }

private:
  static void softmax_row(double* z, std::size_t n) {
    double zmax = z[0];
    for (std::size_t j = 1; j < n; ++j) zmax = std::max(zmax, z[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      z[j] = std::exp(z[j] - zmax);
      sum += z[j];
    }
    for (std::size_t j = 0; j < n; ++j) z[j] /= sum;
  }

  std::vector<std::size_t> dims_;
  std::vector<LayerWeights> weights_;
  std::vector<std::vector<double>> biases_;
  std::vector<std::optional<PruneMask>> masks_;
  Activation hidden_;
  std::uint64_t seed_;
};

struct TrainResult {
  std::vector<double> loss_trajectory; // batch loss per iteration
};

/// Plain minibatch SGD. Batches are drawn through a counter-based stream
/// of (config.seed, iteration), so a fixed seed reproduces the trajectory
/// bit for bit. Aborts with the iteration index if the loss goes
/// non-finite.
inline TrainResult train(DenseNet& net, const Dataset& data, const TrainConfig& cfg) {
  if (cfg.iterations < 1) throw ValidationError("iterations must be >= 1");
  if (!(cfg.learning_rate >= 0.0))
    throw ValidationError("learning rate must be >= 0");
  if (cfg.batch_size < 1) throw ValidationError("batch size must be >= 1");

  TrainResult result;
  result.loss_trajectory.reserve(cfg.iterations);
  std::vector<std::size_t> idx(std::min(cfg.batch_size, data.size()));
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    CounterRng rng(cfg.seed, 0x7000 + it);
    for (auto& i : idx) i = rng.next_below(data.size());
    const Minibatch batch = take_minibatch(data, idx);
    const auto fwd = net.forward(batch);
    const double loss = net.mean_loss(fwd, batch);
    if (!std::isfinite(loss))
      throw Error("training diverged at iteration " + std::to_string(it));
    result.loss_trajectory.push_back(loss);
    const auto grads = net.backward(fwd, batch);
    net.sgd_step(grads, cfg.learning_rate);
  }
  return result;
}

inline double evaluate_loss(const DenseNet& net, const Dataset& data) {
  std::vector<std::size_t> idx(data.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  const Minibatch all = take_minibatch(data, idx);
  return net.mean_loss(net.forward(all), all);
}

inline double accuracy(const DenseNet& net, const Dataset& data) {
  std::vector<std::size_t> idx(data.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  const Minibatch all = take_minibatch(data, idx);
  const auto fwd = net.forward(all);
  const std::size_t classes = net.dims().back();
  std::size_t hits = 0;
  for (std::size_t s = 0; s < all.count; ++s) {
    const double* p = fwd.acts.back().data() + s * classes;
    std::size_t best = 0;
    for (std::size_t j = 1; j < classes; ++j)
      if (p[j] > p[best]) best = j;
    if (best == all.labels[s]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(all.count);
}

} // namespace topoprune
