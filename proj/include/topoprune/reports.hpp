#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "topoprune/compression.hpp"
#include "topoprune/error.hpp"
#include "topoprune/iterative.hpp"
#include "topoprune/monte_carlo.hpp"
#include "topoprune/persistence.hpp"
#include "topoprune/pruning.hpp"
#include "topoprune/sha256.hpp"
#include "topoprune/spanning.hpp"
#include "topoprune/version.hpp"

namespace topoprune {

/// Shortest representation that round-trips a double; used for CSV cells.
inline std::string fmt_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Wraps a payload with tool version, the command name, and a content
/// digest of every input file. No timestamps anywhere: identical inputs
/// and seed produce byte-identical output.
inline nlohmann::json
make_envelope(const std::string& command,
              const std::vector<std::filesystem::path>& inputs,
              std::optional<std::uint64_t> seed, nlohmann::json payload) {
  nlohmann::json env;
  env["tool_version"] = kVersion;
  env["command"] = command;
  nlohmann::json digests = nlohmann::json::object();
  for (const auto& p : inputs) digests[p.string()] = "sha256:" + sha256_file(p);
  env["inputs"] = digests;
  if (seed) env["seed"] = *seed;
  env["payload"] = std::move(payload);
  return env;
}

inline nlohmann::json to_json(const LayerCompression& lc) {
  return {{"layer", lc.layer_id},
          {"kind", to_string(lc.kind)},
          {"weight_count", lc.weight_count},
          {"mst_count", lc.mst_count},
          {"eta_tau", lc.eta_tau},
          {"eta_tau_5dp", round5(lc.eta_tau)}};
}

inline nlohmann::json to_json(const CompressionReport& r) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& lc : r.layers) layers.push_back(to_json(lc));
  return {{"layers", std::move(layers)},
          {"total_weights", r.total_weights},
          {"total_mst", r.total_mst},
          {"final_eta_tau", r.final_eta_tau},
          {"final_eta_tau_5dp", round5(r.final_eta_tau)}};
}

inline nlohmann::json to_json(const NpReport& r) {
  return {{"layer", r.layer_id},
          {"point_count", r.point_count},
          {"raw_np", r.raw_np},
          {"normalized_np", r.normalized_np}};
}

inline nlohmann::json to_json(const OverlapEstimate& e) {
  return {{"m", e.m},
          {"n", e.n},
          {"dist", to_string(e.dist)},
          {"trials", e.trials},
          {"seed", e.seed},
          {"mean_overlap", e.mean_overlap},
          {"std_dev", e.std_dev},
          {"std_error", e.std_error},
          {"per_trial", e.per_trial}};
}

inline nlohmann::json to_json(const OverlapReport& r) {
  return {{"layer", r.layer_id},
          {"alpha", r.alpha},
          {"overlap_count", r.overlap_count},
          {"fraction", r.fraction},
          {"mst_weights", r.mst_weights},
          {"top_alpha_weights", r.top_alpha_weights}};
}

inline nlohmann::json to_json(const LayerRoundMetrics& m) {
  return {{"layer", m.layer_id},
          {"keep", m.keep},
          {"nnz", m.nnz},
          {"sparsity", m.sparsity},
          {"np_pre_mask", m.np_pre_mask},
          {"np_post_mask", m.np_post_mask},
          {"normalized_np_post", m.normalized_np_post},
          {"overlap_x", m.overlap_x}};
}

inline nlohmann::json to_json(const RoundMetrics& m) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : m.layers) layers.push_back(to_json(l));
  return {{"round", m.round},
          {"train_loss", m.train_loss},
          {"val_loss", m.val_loss},
          {"total_np_pre", m.total_np_pre},
          {"total_np_post", m.total_np_post},
          {"layers", std::move(layers)}};
}

namespace detail {

inline std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ValidationError("cannot write CSV file " + path.string());
  return out;
}

} // namespace detail

inline void write_compression_csv(const std::filesystem::path& path,
                                  const CompressionReport& r) {
  auto out = detail::open_csv(path);
  out << "layer,kind,weight_count,mst_count,eta_tau,eta_tau_5dp\n";
  for (const auto& lc : r.layers)
    out << lc.layer_id << ',' << to_string(lc.kind) << ',' << lc.weight_count << ','
        << lc.mst_count << ',' << fmt_double(lc.eta_tau) << ','
        << fmt_double(round5(lc.eta_tau)) << '\n';
  out << "final,," << r.total_weights << ',' << r.total_mst << ','
      << fmt_double(r.final_eta_tau) << ',' << fmt_double(round5(r.final_eta_tau))
      << '\n';
}

inline void write_diagram_csv(const std::filesystem::path& path,
                              const PersistenceDiagram& d) {
  auto out = detail::open_csv(path);
  out << "birth,death\n";
  for (const auto& p : d.points)
    out << fmt_double(p.birth) << ',' << fmt_double(p.death) << '\n';
}

inline void write_forest_csv(const std::filesystem::path& path,
                             const SpanningForest& f) {
  auto out = detail::open_csv(path);
  out << "row,col,weight\n";
  for (const auto& e : f.edges)
    out << e.row << ',' << e.col << ',' << fmt_double(e.weight) << '\n';
}

inline void write_trials_csv(const std::filesystem::path& path,
                             const OverlapEstimate& e) {
  auto out = detail::open_csv(path);
  out << "trial,overlap_fraction\n";
  for (std::size_t t = 0; t < e.per_trial.size(); ++t)
    out << t << ',' << fmt_double(e.per_trial[t]) << '\n';
}

inline void write_overlap_weights_csv(const std::filesystem::path& path,
                                      const OverlapReport& r) {
  auto out = detail::open_csv(path);
  out << "set,weight\n";
  for (double w : r.mst_weights) out << "mst," << fmt_double(w) << '\n';
  for (double w : r.top_alpha_weights) out << "top_alpha," << fmt_double(w) << '\n';
}

inline void write_rounds_csv(const std::filesystem::path& path,
                             std::span<const RoundMetrics> rounds) {
  auto out = detail::open_csv(path);
  out << "round,layer,keep,nnz,sparsity,np_pre_mask,np_post_mask,"
         "normalized_np_post,overlap_x,train_loss,val_loss\n";
  for (const auto& r : rounds)
    for (const auto& l : r.layers)
      out << r.round << ',' << l.layer_id << ',' << l.keep << ',' << l.nnz << ','
          << fmt_double(l.sparsity) << ',' << fmt_double(l.np_pre_mask) << ','
          << fmt_double(l.np_post_mask) << ',' << fmt_double(l.normalized_np_post)
          << ',' << fmt_double(l.overlap_x) << ',' << fmt_double(r.train_loss)
          << ',' << fmt_double(r.val_loss) << '\n';
}

} // namespace topoprune
