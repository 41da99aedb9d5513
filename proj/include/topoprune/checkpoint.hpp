#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "topoprune/error.hpp"
#include "topoprune/npy.hpp"
#include "topoprune/trainer.hpp"

namespace topoprune {

/// Writes the network as one NPY file per weight matrix / bias vector
/// (biases stored 1 x n) plus a manifest recording layer order,
/// activation, and seed.
inline void save_checkpoint(const DenseNet& net, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["activation"] = to_string(net.hidden_activation());
  manifest["seed"] = net.seed();
  manifest["layers"] = nlohmann::json::array();
  for (std::size_t k = 0; k < net.layer_count(); ++k) {
    const std::string wname = "layer" + std::to_string(k) + "_w.npy";
    const std::string bname = "layer" + std::to_string(k) + "_b.npy";
    write_npy(dir / wname, net.weights(k));
    write_npy(dir / bname, LayerWeights(1, net.bias(k).size(), net.bias(k)));
    manifest["layers"].push_back({{"in", net.weights(k).rows},
                                  {"out", net.weights(k).cols},
                                  {"weights", wname},
                                  {"bias", bname}});
  }
  std::ofstream out(dir / "manifest.json");
  if (!out) throw ValidationError("cannot write manifest in " + dir.string());
  out << manifest.dump(2) << '\n';
}

inline DenseNet load_checkpoint(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw ValidationError("cannot open manifest in " + dir.string());
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed manifest: " + std::string(e.what()));
  }
  const std::string act = manifest.at("activation").get<std::string>();
  if (act != "relu" && act != "tanh")
    throw ValidationError("manifest activation must be relu or tanh");
  const auto& layers = manifest.at("layers");
  if (!layers.is_array() || layers.empty())
    throw ValidationError("manifest needs a non-empty layers array");

  std::vector<std::size_t> dims;
  dims.push_back(layers[0].at("in").get<std::size_t>());
  for (const auto& l : layers) dims.push_back(l.at("out").get<std::size_t>());

  DenseNet net(dims, act == "relu" ? Activation::relu : Activation::tanh,
               manifest.at("seed").get<std::uint64_t>());
  for (std::size_t k = 0; k < net.layer_count(); ++k) {
    const auto& entry = layers[k];
    LayerWeights w = read_npy(dir / entry.at("weights").get<std::string>());
    if (w.rows != dims[k] || w.cols != dims[k + 1])
      throw ValidationError("checkpoint layer " + std::to_string(k) +
                            " has mismatched weight shape");
    net.weights_mut(k) = std::move(w);
    LayerWeights b = read_npy(dir / entry.at("bias").get<std::string>());
    if (b.rows != 1 || b.cols != dims[k + 1])
      throw ValidationError("checkpoint layer " + std::to_string(k) +
                            " has mismatched bias shape");
    net.bias_mut(k) = std::move(b.values);
  }
  return net;
}

} // namespace topoprune
