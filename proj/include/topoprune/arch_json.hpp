#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "topoprune/compression.hpp"
#include "topoprune/error.hpp"

namespace topoprune {

namespace detail {

inline std::size_t require_count(const nlohmann::json& j, const std::string& key) {
  if (!j.contains(key))
    throw ValidationError("layer is missing required field '" + key + "'");
  const auto& v = j.at(key);
  if (!v.is_number_unsigned() || v.get<std::uint64_t>() < 1)
    throw ValidationError("field '" + key + "' must be a positive integer");
  return v.get<std::size_t>();
}

inline std::array<std::size_t, 2> require_pair(const nlohmann::json& j,
                                               const std::string& key,
                                               std::size_t minimum) {
  if (!j.contains(key))
    throw ValidationError("layer is missing required field '" + key + "'");
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 2)
    throw ValidationError("field '" + key + "' must be an array of two integers");
  std::array<std::size_t, 2> out{};
  for (int i = 0; i < 2; ++i) {
    if (!v[i].is_number_unsigned() || v[i].get<std::uint64_t>() < minimum)
      throw ValidationError("field '" + key + "' entries must be integers >= " +
                            std::to_string(minimum));
    out[i] = v[i].get<std::size_t>();
  }
  return out;
}

// Closed-world check: any key outside the schema is an error.
inline void reject_unknown(const nlohmann::json& j,
                           const std::set<std::string>& allowed,
                           const std::string& context) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key))
      throw ValidationError("unknown field '" + key + "' in " + context);
  }
}

} // namespace detail

inline LayerSpec parse_layer_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("layer entry must be an object");
  if (!j.contains("type") || !j.at("type").is_string())
    throw ValidationError("layer entry needs a string 'type'");
  const std::string type = j.at("type").get<std::string>();
  LayerSpec s;
  if (type == "dense") {
    detail::reject_unknown(j, {"type", "in", "out"}, "dense layer");
    s.kind = LayerKind::dense;
    s.in = detail::require_count(j, "in");
    s.out = detail::require_count(j, "out");
  } else if (type == "recurrent") {
    detail::reject_unknown(j, {"type", "hidden"}, "recurrent layer");
    s.kind = LayerKind::recurrent;
    s.hidden = detail::require_count(j, "hidden");
  } else if (type == "conv2d") {
    detail::reject_unknown(j, {"type", "spatial", "kernel", "stride", "pad"},
                           "conv2d layer");
    s.kind = LayerKind::conv2d;
    s.spatial = detail::require_pair(j, "spatial", 1);
    s.kernel = detail::require_pair(j, "kernel", 1);
    if (j.contains("stride")) s.stride = detail::require_pair(j, "stride", 1);
    if (j.contains("pad")) s.pad = detail::require_pair(j, "pad", 0);
  } else {
    throw ValidationError("unknown layer type '" + type + "'");
  }
  validate_spec(s);
  return s;
}

inline ArchSpec parse_arch_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("architecture spec must be an object");
  detail::reject_unknown(j, {"layers"}, "architecture spec");
  if (!j.contains("layers") || !j.at("layers").is_array() || j.at("layers").empty())
    throw ValidationError("architecture spec needs a non-empty 'layers' array");
  ArchSpec arch;
  for (const auto& layer : j.at("layers")) arch.layers.push_back(parse_layer_json(layer));
  return arch;
}

inline ArchSpec parse_arch(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open architecture spec " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed JSON in " + path.string() + ": " + e.what());
  }
  return parse_arch_json(j);
}

} // namespace topoprune
