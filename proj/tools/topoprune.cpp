// Command-line front end: closed-form compression ratios, neural
// persistence, spanning forests, overlap bounds and simulations, pruning
// masks, and the desk-scale iterative pruning loop.
//
// All results go to stdout as a JSON envelope {tool_version, command,
// inputs (sha256 per file), seed?, payload}; --csv writes row-level data
// beside it. Exit codes: 0 success, 2 validation error, 3 infeasible
// schedule.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "topoprune/topoprune.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void emit(const json& envelope) { std::cout << envelope.dump(2) << '\n'; }

fs::path default_mask_path(const fs::path& weights) {
  fs::path p = weights;
  p.replace_extension();
  p += ".mask.npy";
  return p;
}

fs::path csv_path_for_layer(const fs::path& base, std::size_t index,
                            std::size_t total) {
  if (total <= 1) return base;
  fs::path p = base;
  const std::string ext = p.extension().string();
  p.replace_extension();
  p += "_" + std::to_string(index) + ext;
  return p;
}

struct EtaArgs {
  std::string arch;
  bool paper_literal = false;
  std::string csv;
};

struct NpArgs {
  std::vector<std::string> weights;
  double p = 2.0;
  std::string csv;
};

struct MstArgs {
  std::string weights;
  std::string out;
};

struct BoundArgs {
  std::size_t m = 0, n = 0;
  double sparsity = 1.0;
  bool sparsity_given = false;
};

struct PmfArgs {
  std::size_t m = 0, n = 0, alpha = 0, w = 0;
};

struct SimArgs {
  std::size_t m = 0, n = 0, trials = 200;
  std::uint64_t seed = 0;
  std::string dist = "uniform01";
  std::string csv;
};

struct OverlapArgs {
  std::string weights;
  std::string csv;
};

struct PruneArgs {
  std::string weights;
  std::size_t keep = 0;
  std::string method;
  bool truncate = false;
  std::string out;
};

struct RunArgs {
  std::string loop;
  std::string arch;
  double sparsity = 0.0;
  std::size_t rounds = 1;
  std::size_t iters = 100;
  std::uint64_t seed = 0;
  double lr = 0.05;
  std::size_t batch = 32;
  std::size_t samples = 512;
  std::size_t val_samples = 256;
  std::string dataset = "moons";
  std::string activation = "tanh";
  bool percent_of_remaining = false;
  std::string features_file;
  std::string labels_file;
  std::string csv;
  std::string checkpoint_out;
};

int run_eta(const EtaArgs& a) {
  const auto arch = topoprune::parse_arch(a.arch);
  const auto report = topoprune::eta_tau_network(arch, a.paper_literal);
  if (!a.csv.empty()) topoprune::write_compression_csv(a.csv, report);
  emit(topoprune::make_envelope("eta", {a.arch}, std::nullopt,
                                topoprune::to_json(report)));
  return 0;
}

int run_np(const NpArgs& a) {
  json layers = json::array();
  std::vector<fs::path> inputs;
  std::vector<topoprune::NpReport> reports;
  for (std::size_t i = 0; i < a.weights.size(); ++i) {
    const fs::path path = a.weights[i];
    inputs.push_back(path);
    const auto w = topoprune::read_npy(path);
    const auto diagram =
        topoprune::superlevel_filtration(topoprune::normalize_weights(w));
    auto report = topoprune::make_np_report(path.stem().string(), diagram, a.p);
    if (!a.csv.empty())
      topoprune::write_diagram_csv(csv_path_for_layer(a.csv, i, a.weights.size()),
                                   diagram);
    layers.push_back(topoprune::to_json(report));
    reports.push_back(std::move(report));
  }
  json payload = {{"p", a.p},
                  {"layers", std::move(layers)},
                  {"total_np", topoprune::total_neural_persistence(reports)}};
  emit(topoprune::make_envelope("np", inputs, std::nullopt, std::move(payload)));
  return 0;
}

int run_mst(const MstArgs& a) {
  const auto w = topoprune::read_npy(a.weights);
  const auto g = topoprune::normalize_weights(w);
  const auto forest = topoprune::max_spanning_forest(g);
  topoprune::write_forest_csv(a.out, forest);
  json payload = {{"layer", fs::path(a.weights).stem().string()},
                  {"m", g.m},
                  {"n", g.n},
                  {"w_max", g.w_max},
                  {"degenerate", g.degenerate},
                  {"edge_count", forest.edges.size()},
                  {"components", forest.components_after},
                  {"out", a.out}};
  emit(topoprune::make_envelope("mst", {a.weights}, std::nullopt,
                                std::move(payload)));
  return 0;
}

int run_bound(const BoundArgs& a) {
  const double value = a.sparsity_given
                           ? topoprune::overlap_lower_bound_sparse(a.m, a.n, a.sparsity)
                           : topoprune::overlap_lower_bound(a.m, a.n);
  json payload = {{"m", a.m},
                  {"n", a.n},
                  {"sparsity_p", a.sparsity_given ? a.sparsity : 1.0},
                  {"alpha", a.m + a.n - 1},
                  {"bound", value}};
  emit(topoprune::make_envelope("bound", {}, std::nullopt, std::move(payload)));
  return 0;
}

int run_pmf(const PmfArgs& a, bool tail) {
  const double value = tail ? topoprune::random_overlap_tail(a.m, a.n, a.alpha, a.w)
                            : topoprune::random_overlap_pmf(a.m, a.n, a.alpha, a.w);
  json payload = {{"m", a.m}, {"n", a.n},   {"alpha", a.alpha},
                  {"w", a.w}, {"probability", value}};
  emit(topoprune::make_envelope(tail ? "tail" : "pmf", {}, std::nullopt,
                                std::move(payload)));
  return 0;
}

int run_simulate(const SimArgs& a) {
  topoprune::WeightDist dist;
  if (a.dist == "uniform01")
    dist = topoprune::WeightDist::uniform01;
  else if (a.dist == "gaussian-abs")
    dist = topoprune::WeightDist::gaussian_abs;
  else
    throw topoprune::ValidationError("unknown distribution '" + a.dist +
                                     "' (uniform01 or gaussian-abs)");
  const auto est = topoprune::monte_carlo_overlap(a.m, a.n, dist, a.trials, a.seed);
  if (!a.csv.empty()) topoprune::write_trials_csv(a.csv, est);
  emit(topoprune::make_envelope("simulate", {}, a.seed, topoprune::to_json(est)));
  return 0;
}

int run_overlap(const OverlapArgs& a) {
  const auto w = topoprune::read_npy(a.weights);
  const auto report =
      topoprune::measure_overlap(w, fs::path(a.weights).stem().string());
  if (!a.csv.empty()) topoprune::write_overlap_weights_csv(a.csv, report);
  emit(topoprune::make_envelope("overlap", {a.weights}, std::nullopt,
                                topoprune::to_json(report)));
  return 0;
}

int run_prune(const PruneArgs& a) {
  const auto w = topoprune::read_npy(a.weights);
  topoprune::PruneMask mask;
  if (a.method == "mp")
    mask = topoprune::magnitude_mask(w, a.keep);
  else if (a.method == "timp")
    mask = topoprune::timp_mask(w, a.keep, a.truncate);
  else
    throw topoprune::ValidationError("unknown method '" + a.method +
                                     "' (mp or timp)");
  const fs::path out = a.out.empty() ? default_mask_path(a.weights) : fs::path(a.out);
  topoprune::write_mask(out, mask);
  json payload = {{"layer", fs::path(a.weights).stem().string()},
                  {"shape", {mask.rows, mask.cols}},
                  {"keep", a.keep},
                  {"nnz", mask.nnz},
                  {"method", topoprune::to_string(mask.method)},
                  {"truncate", a.truncate},
                  {"out", out.string()},
                  {"mask_digest", "sha256:" + topoprune::sha256_file(out)}};
  emit(topoprune::make_envelope("prune", {a.weights}, std::nullopt,
                                std::move(payload)));
  return 0;
}

topoprune::Dataset load_npy_dataset(const std::string& features_file,
                                    const std::string& labels_file,
                                    std::size_t classes) {
  const auto feats = topoprune::read_npy(features_file);
  const auto labels = topoprune::read_npy(labels_file);
  const std::size_t count = feats.rows;
  if (labels.size() != count)
    throw topoprune::ValidationError("labels must hold one entry per sample");
  topoprune::Dataset data;
  data.feature_dim = feats.cols;
  data.num_classes = classes;
  data.features = feats.values;
  data.labels.reserve(count);
  for (double v : labels.values) {
    if (v < 0 || v != std::floor(v) || static_cast<std::size_t>(v) >= classes)
      throw topoprune::ValidationError("labels must be integers in [0, classes)");
    data.labels.push_back(static_cast<std::size_t>(v));
  }
  return data;
}

int run_loop(const RunArgs& a) {
  topoprune::LoopKind loop;
  if (a.loop == "imp")
    loop = topoprune::LoopKind::imp;
  else if (a.loop == "timp")
    loop = topoprune::LoopKind::timp;
  else
    throw topoprune::ValidationError("unknown loop '" + a.loop + "' (imp or timp)");

  const auto arch = topoprune::parse_arch(a.arch);
  std::vector<std::size_t> dims;
  std::vector<std::pair<std::size_t, std::size_t>> shapes;
  for (std::size_t k = 0; k < arch.layers.size(); ++k) {
    const auto& l = arch.layers[k];
    if (l.kind != topoprune::LayerKind::dense)
      throw topoprune::ValidationError(
          "run trains dense architectures only; layer " + std::to_string(k) +
          " is " + topoprune::to_string(l.kind));
    if (k == 0)
      dims.push_back(l.in);
    else if (dims.back() != l.in)
      throw topoprune::ValidationError("layer " + std::to_string(k) +
                                       " input dim does not match previous output");
    dims.push_back(l.out);
    shapes.emplace_back(l.in, l.out);
  }

  std::vector<fs::path> inputs = {a.arch};
  topoprune::Dataset train_data, val_data;
  auto split_off_validation = [&](const topoprune::Dataset& all) {
    train_data.feature_dim = val_data.feature_dim = all.feature_dim;
    train_data.num_classes = val_data.num_classes = all.num_classes;
    for (std::size_t i = 0; i < all.size(); ++i) {
      auto& dst = i < a.samples ? train_data : val_data;
      const auto s = all.sample(i);
      dst.features.insert(dst.features.end(), s.begin(), s.end());
      dst.labels.push_back(all.labels[i]);
    }
  };
  if (!a.features_file.empty() || !a.labels_file.empty()) {
    if (a.features_file.empty() || a.labels_file.empty())
      throw topoprune::ValidationError("--features and --labels go together");
    inputs.push_back(a.features_file);
    inputs.push_back(a.labels_file);
    const auto data = load_npy_dataset(a.features_file, a.labels_file, dims.back());
    if (data.feature_dim != dims.front())
      throw topoprune::ValidationError("dataset feature width does not match input dim");
    train_data = data;
    val_data = data;
  } else if (a.dataset == "moons") {
    if (dims.back() != 2)
      throw topoprune::ValidationError("two-moons data has 2 classes; last layer out must be 2");
    split_off_validation(
        topoprune::make_two_moons(a.samples + a.val_samples, dims.front(), a.seed));
  } else if (a.dataset == "blobs") {
    split_off_validation(topoprune::make_blobs(a.samples + a.val_samples,
                                               dims.front(), dims.back(), a.seed));
  } else {
    throw topoprune::ValidationError("unknown dataset '" + a.dataset +
                                     "' (moons or blobs)");
  }

  const auto activation = a.activation == "relu" ? topoprune::Activation::relu
                                                 : topoprune::Activation::tanh;
  if (a.activation != "relu" && a.activation != "tanh")
    throw topoprune::ValidationError("activation must be relu or tanh");

  topoprune::DenseNet net(dims, activation, a.seed);
  const auto schedule = topoprune::build_imp_schedule(
      shapes, a.sparsity, a.rounds, a.iters,
      a.percent_of_remaining ? topoprune::ScheduleBasis::percent_of_remaining
                             : topoprune::ScheduleBasis::percent_of_original);

  topoprune::TrainConfig cfg;
  cfg.seed = a.seed;
  cfg.learning_rate = a.lr;
  cfg.batch_size = a.batch;

  const auto metrics = topoprune::run_iterative(
      loop, net, schedule,
      [&](topoprune::DenseNet& n, std::size_t iters) {
        topoprune::TrainConfig round_cfg = cfg;
        round_cfg.iterations = iters;
        return topoprune::train(n, train_data, round_cfg);
      },
      [&](const topoprune::DenseNet& n) {
        return topoprune::evaluate_loss(n, val_data);
      });

  if (!a.csv.empty()) topoprune::write_rounds_csv(a.csv, metrics);
  if (!a.checkpoint_out.empty()) topoprune::save_checkpoint(net, a.checkpoint_out);

  json rounds = json::array();
  for (const auto& m : metrics) rounds.push_back(topoprune::to_json(m));
  json payload = {{"loop", a.loop},
                  {"target_sparsity_percent", a.sparsity},
                  {"rounds", a.rounds},
                  {"iterations_per_round", a.iters},
                  {"dataset", a.features_file.empty() ? a.dataset : "file"},
                  {"schedule_warnings", schedule.warnings},
                  {"final_accuracy", topoprune::accuracy(net, val_data)},
                  {"round_metrics", std::move(rounds)}};
  emit(topoprune::make_envelope("run", inputs, a.seed, std::move(payload)));
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zeroth-order topology of neural-network layers: spanning-"
               "forest persistence, critical compression ratios, overlap "
               "bounds, and topology-preserving pruning"};
  app.require_subcommand(1);

  EtaArgs eta;
  auto* eta_cmd = app.add_subcommand(
      "eta", "Critical compression ratios of an architecture spec");
  eta_cmd->add_option("--arch", eta.arch, "architecture spec JSON")->required();
  eta_cmd->add_flag("--paper-literal-conv", eta.paper_literal,
                    "use the uncorrected conv output-dimension formula");
  eta_cmd->add_option("--csv", eta.csv, "write per-layer rows to this CSV file");

  NpArgs np;
  auto* np_cmd =
      app.add_subcommand("np", "Neural persistence of weight matrices");
  np_cmd->add_option("--weights", np.weights, "NPY weight files")
      ->required()
      ->expected(-1);
  np_cmd->add_option("--p", np.p, "norm order (default 2)");
  np_cmd->add_option("--csv", np.csv, "write persistence diagrams to CSV");

  MstArgs mst;
  auto* mst_cmd =
      app.add_subcommand("mst", "Maximum spanning forest of one layer");
  mst_cmd->add_option("--weights", mst.weights, "NPY weight file")->required();
  mst_cmd->add_option("--out", mst.out, "forest CSV output path")->required();

  BoundArgs bound;
  auto* bound_cmd = app.add_subcommand(
      "bound", "Lower bound on expected MST / top-alpha overlap");
  bound_cmd->add_option("--m", bound.m, "input vertex count")->required();
  bound_cmd->add_option("--n", bound.n, "output vertex count")->required();
  bound_cmd->add_option("--sparsity", bound.sparsity,
                        "fraction of nonzero weights in (0, 1]")
      ->check(CLI::Range(0.0, 1.0));

  PmfArgs pmf;
  auto* pmf_cmd = app.add_subcommand(
      "pmf", "Probability of exactly w overlaps between random alpha-subsets");
  pmf_cmd->add_option("--m", pmf.m)->required();
  pmf_cmd->add_option("--n", pmf.n)->required();
  pmf_cmd->add_option("--alpha", pmf.alpha)->required();
  pmf_cmd->add_option("--w", pmf.w)->required();

  PmfArgs tail;
  auto* tail_cmd = app.add_subcommand(
      "tail", "Probability of at least w overlaps between random alpha-subsets");
  tail_cmd->add_option("--m", tail.m)->required();
  tail_cmd->add_option("--n", tail.n)->required();
  tail_cmd->add_option("--alpha", tail.alpha)->required();
  tail_cmd->add_option("--w", tail.w)->required();

  SimArgs sim;
  auto* sim_cmd = app.add_subcommand(
      "simulate", "Seeded Monte Carlo estimate of the MST / top-alpha overlap");
  sim_cmd->add_option("--m", sim.m)->required();
  sim_cmd->add_option("--n", sim.n)->required();
  sim_cmd->add_option("--trials", sim.trials, "number of trials (default 200)");
  sim_cmd->add_option("--seed", sim.seed, "RNG seed")->required();
  sim_cmd->add_option("--dist", sim.dist, "uniform01 or gaussian-abs");
  sim_cmd->add_option("--csv", sim.csv, "write per-trial rows to this CSV file");

  OverlapArgs overlap;
  auto* overlap_cmd = app.add_subcommand(
      "overlap", "MST / top-alpha overlap of one weight matrix");
  overlap_cmd->add_option("--weights", overlap.weights, "NPY weight file")
      ->required();
  overlap_cmd->add_option("--csv", overlap.csv,
                          "write both normalized weight lists to CSV");

  PruneArgs prune;
  auto* prune_cmd =
      app.add_subcommand("prune", "Write a magnitude or T-IMP mask as NPY");
  prune_cmd->add_option("--weights", prune.weights, "NPY weight file")->required();
  prune_cmd->add_option("--keep", prune.keep, "number of weights to keep")
      ->required();
  prune_cmd->add_option("--method", prune.method, "mp or timp")->required();
  prune_cmd->add_flag("--truncate", prune.truncate,
                      "below alpha, keep the most persistent forest edges "
                      "(no longer topology-preserving)");
  prune_cmd->add_option("--out", prune.out,
                        "mask output path (default <weights>.mask.npy)");

  RunArgs run;
  auto* run_cmd = app.add_subcommand(
      "run", "Iterative pruning loop (train, mask, repeat) at desk scale");
  run_cmd->add_option("--loop", run.loop, "imp or timp")->required();
  run_cmd->add_option("--arch", run.arch, "dense architecture spec JSON")
      ->required();
  run_cmd->add_option("--sparsity", run.sparsity,
                      "target sparsity percent in (0, 100)")
      ->required();
  run_cmd->add_option("--rounds", run.rounds, "pruning rounds N")->required();
  run_cmd->add_option("--iters", run.iters, "training iterations per round")
      ->required();
  run_cmd->add_option("--seed", run.seed, "RNG seed")->required();
  run_cmd->add_option("--lr", run.lr, "SGD learning rate (default 0.05)");
  run_cmd->add_option("--batch", run.batch, "minibatch size (default 32)");
  run_cmd->add_option("--samples", run.samples, "training samples (default 512)");
  run_cmd->add_option("--val-samples", run.val_samples,
                      "validation samples (default 256)");
  run_cmd->add_option("--dataset", run.dataset,
                      "synthetic dataset: moons or blobs (default moons)");
  run_cmd->add_option("--activation", run.activation,
                      "hidden activation: tanh or relu (default tanh)");
  run_cmd->add_flag("--percent-of-remaining", run.percent_of_remaining,
                    "remove p/N percent of the remaining (not original) count "
                    "each round");
  run_cmd->add_option("--features", run.features_file,
                      "NPY feature matrix (overrides synthetic data)");
  run_cmd->add_option("--labels", run.labels_file, "NPY label vector");
  run_cmd->add_option("--csv", run.csv, "write round metrics to this CSV file");
  run_cmd->add_option("--checkpoint-out", run.checkpoint_out,
                      "save the final network to this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (eta_cmd->parsed()) return run_eta(eta);
    if (np_cmd->parsed()) return run_np(np);
    if (mst_cmd->parsed()) return run_mst(mst);
    if (bound_cmd->parsed()) {
      bound.sparsity_given = bound_cmd->count("--sparsity") > 0;
      return run_bound(bound);
    }
    if (pmf_cmd->parsed()) return run_pmf(pmf, false);
    if (tail_cmd->parsed()) return run_pmf(tail, true);
    if (sim_cmd->parsed()) return run_simulate(sim);
    if (overlap_cmd->parsed()) return run_overlap(overlap);
    if (prune_cmd->parsed()) return run_prune(prune);
    if (run_cmd->parsed()) return run_loop(run);
  } catch (const topoprune::InfeasibleScheduleError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const topoprune::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
