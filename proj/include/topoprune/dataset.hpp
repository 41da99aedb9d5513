#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "topoprune/error.hpp"
#include "topoprune/rng.hpp"

namespace topoprune {

/// Row-major feature matrix plus integer class labels.
struct Dataset {
  std::size_t feature_dim = 0;
  std::size_t num_classes = 0;
  std::vector<double> features; // size() * feature_dim
  std::vector<std::size_t> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const double> sample(std::size_t i) const {
    return {features.data() + i * feature_dim, feature_dim};
  }
};

struct Minibatch {
  std::size_t count = 0;
  std::size_t feature_dim = 0;
  std::vector<double> features;
  std::vector<std::size_t> labels;
};

inline Minibatch take_minibatch(const Dataset& data, std::span<const std::size_t> idx) {
  Minibatch b;
  b.count = idx.size();
  b.feature_dim = data.feature_dim;
  b.features.reserve(b.count * b.feature_dim);
  b.labels.reserve(b.count);
  for (std::size_t i : idx) {
    auto s = data.sample(i);
    b.features.insert(b.features.end(), s.begin(), s.end());
    b.labels.push_back(data.labels[i]);
  }
  return b;
}

namespace detail {

// Fixed random linear lift R^2 -> R^d with roughly unit-norm columns.
inline std::vector<double> make_lift(std::size_t dim, CounterRng& rng) {
  std::vector<double> lift(dim * 2);
  for (double& v : lift) v = rng.gaussian() / std::sqrt(2.0);
  return lift;
}

} // namespace detail

/// Linearly separable Gaussian blobs: class centers sit on a circle of
/// radius `margin` in a random 2-D subspace, unit-variance noise in every
/// lifted coordinate direction is scaled by `noise`.
inline Dataset make_blobs(std::size_t samples, std::size_t feature_dim,
                          std::size_t classes, std::uint64_t seed,
                          double margin = 6.0, double noise = 1.0) {
  if (samples < 1 || feature_dim < 1 || classes < 2)
    throw ValidationError("blobs need samples >= 1, feature_dim >= 1, classes >= 2");
  CounterRng rng(seed, 0x1a);
  const auto lift = detail::make_lift(feature_dim, rng);
  Dataset data;
  data.feature_dim = feature_dim;
  data.num_classes = classes;
  data.features.resize(samples * feature_dim);
  data.labels.resize(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    const std::size_t c = i % classes;
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(c) /
                         static_cast<double>(classes);
    const double px = margin * std::cos(angle);
    const double py = margin * std::sin(angle);
    for (std::size_t d = 0; d < feature_dim; ++d) {
      data.features[i * feature_dim + d] =
          lift[d * 2] * px + lift[d * 2 + 1] * py + noise * rng.gaussian();
    }
    data.labels[i] = c;
  }
  return data;
}

/// Two interleaved half-circles (not linearly separable), lifted from 2-D
/// to `feature_dim` coordinates through a fixed random linear map.
inline Dataset make_two_moons(std::size_t samples, std::size_t feature_dim,
                              std::uint64_t seed, double noise = 0.15) {
  if (samples < 2 || feature_dim < 1)
    throw ValidationError("two moons need samples >= 2 and feature_dim >= 1");
  CounterRng rng(seed, 0x2b);
  const auto lift = detail::make_lift(feature_dim, rng);
  Dataset data;
  data.feature_dim = feature_dim;
  data.num_classes = 2;
  data.features.resize(samples * feature_dim);
  data.labels.resize(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    const std::size_t c = i % 2;
    const double t = std::numbers::pi * rng.uniform01();
    double px, py;
    if (c == 0) {
      px = std::cos(t);
      py = std::sin(t);
    } else {
      px = 1.0 - std::cos(t);
      py = 0.5 - std::sin(t);
    }
    px += noise * rng.gaussian();
    py += noise * rng.gaussian();
    for (std::size_t d = 0; d < feature_dim; ++d)
      data.features[i * feature_dim + d] = lift[d * 2] * px + lift[d * 2 + 1] * py;
    data.labels[i] = c;
  }
  return data;
}

} // namespace topoprune
