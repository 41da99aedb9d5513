#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "support/oracles.hpp"
#include "topoprune/npy.hpp"

using json = nlohmann::json;
namespace fs = std::filesystem;

#ifndef TOPOPRUNE_CLI_PATH
#error "TOPOPRUNE_CLI_PATH must point at the built CLI binary"
#endif
#ifndef TOPOPRUNE_SPECS_DIR
#error "TOPOPRUNE_SPECS_DIR must point at the bundled architecture specs"
#endif

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
};

CliResult run_cli(const std::string& args, bool merge_stderr = false) {
  const std::string cmd = std::string(TOPOPRUNE_CLI_PATH) + " " + args +
                          (merge_stderr ? " 2>&1" : " 2>/dev/null");
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult result;
  std::array<char, 4096> buf;
  std::size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0)
    result.out.append(buf.data(), got);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

fs::path scratch_dir() {
  const auto dir = fs::temp_directory_path() / "topoprune_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string specs(const std::string& name) {
  return std::string(TOPOPRUNE_SPECS_DIR) + "/" + name;
}

} // namespace

TEST_CASE("eta reproduces the bundled FCN table and writes CSV") {
  const auto csv = scratch_dir() / "eta.csv";
  const auto r = run_cli("eta --arch " + specs("mnist_fcn.json") + " --csv " +
                         csv.string());
  REQUIRE(r.exit_code == 0);
  const json env = json::parse(r.out);
  CHECK(env.at("command") == "eta");
  CHECK(env.at("inputs").size() == 1);
  CHECK(env.at("payload").at("final_eta_tau_5dp").get<double>() ==
        Catch::Approx(66.77852).margin(5e-6));
  REQUIRE(fs::exists(csv));
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "layer,kind,weight_count,mst_count,eta_tau,eta_tau_5dp");
}

TEST_CASE("bound evaluates the closed-form sum") {
  const auto r = run_cli("bound --m 100 --n 10");
  REQUIRE(r.exit_code == 0);
  const json env = json::parse(r.out);
  CHECK(env.at("payload").at("bound").get<double>() ==
        Catch::Approx(0.0490894774792394).epsilon(1e-9));
  CHECK(env.at("payload").at("alpha") == 109);
}

TEST_CASE("pmf and tail match the published probabilities") {
  const auto pmf = run_cli("pmf --m 100 --n 10 --alpha 109 --w 5");
  REQUIRE(pmf.exit_code == 0);
  CHECK(json::parse(pmf.out).at("payload").at("probability").get<double>() ==
        Catch::Approx(0.011).margin(0.001));
  const auto tail = run_cli("tail --m 100 --n 10 --alpha 109 --w 5");
  REQUIRE(tail.exit_code == 0);
  CHECK(json::parse(tail.out).at("payload").at("probability").get<double>() ==
        Catch::Approx(0.994).margin(0.002));
}

TEST_CASE("simulate is byte-identical for a fixed seed and refuses to run without one") {
  const auto a = run_cli("simulate --m 12 --n 7 --trials 25 --seed 42");
  const auto b = run_cli("simulate --m 12 --n 7 --trials 25 --seed 42");
  REQUIRE(a.exit_code == 0);
  CHECK(a.out == b.out);
  const json env = json::parse(a.out);
  CHECK(env.at("seed") == 42);
  CHECK(env.at("payload").at("per_trial").size() == 25);

  const auto missing = run_cli("simulate --m 12 --n 7 --trials 25");
  CHECK(missing.exit_code == 2);
}

TEST_CASE("np, mst, overlap, and prune drive the NPY surface") {
  const auto dir = scratch_dir();
  const auto wpath = dir / "layer.npy";
  topoprune::write_npy(wpath, oracles::random_layer(10, 10, 77));

  SECTION("np reports per-layer and total persistence") {
    const auto csv = dir / "diagram.csv";
    const auto r =
        run_cli("np --weights " + wpath.string() + " --csv " + csv.string());
    REQUIRE(r.exit_code == 0);
    const json env = json::parse(r.out);
    CHECK(env.at("payload").at("layers").size() == 1);
    CHECK(env.at("payload").at("layers")[0].at("point_count") == 19);
    CHECK(env.at("payload").at("total_np").get<double>() > 0.0);
    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == "birth,death");
  }

  SECTION("mst writes the forest as CSV") {
    const auto csv = dir / "forest.csv";
    const auto r =
        run_cli("mst --weights " + wpath.string() + " --out " + csv.string());
    REQUIRE(r.exit_code == 0);
    CHECK(json::parse(r.out).at("payload").at("edge_count") == 19);
    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == "row,col,weight");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) ++rows;
    CHECK(rows == 19);
  }

  SECTION("overlap reports the fraction and both weight lists") {
    const auto r = run_cli("overlap --weights " + wpath.string());
    REQUIRE(r.exit_code == 0);
    const json payload = json::parse(r.out).at("payload");
    CHECK(payload.at("alpha") == 19);
    CHECK(payload.at("mst_weights").size() == 19);
    CHECK(payload.at("top_alpha_weights").size() == 19);
    const double x = payload.at("fraction").get<double>();
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
  }

  SECTION("prune timp writes a mask and keeps the forest") {
    const auto mpath = dir / "mask.npy";
    const auto r = run_cli("prune --weights " + wpath.string() +
                           " --keep 30 --method timp --out " + mpath.string());
    REQUIRE(r.exit_code == 0);
    CHECK(json::parse(r.out).at("payload").at("nnz") == 30);
    const auto mask = topoprune::read_mask_npy(mpath);
    CHECK(mask.nnz == 30);
  }

  SECTION("prune below alpha without --truncate exits 2 naming alpha") {
    const auto r = run_cli(
        "prune --weights " + wpath.string() + " --keep 10 --method timp",
        /*merge_stderr=*/true);
    CHECK(r.exit_code == 2);
    CHECK_THAT(r.out, Catch::Matchers::ContainsSubstring("alpha = 19"));
  }

  SECTION("np handles several layers and suffixes the diagram CSVs") {
    const auto w2path = dir / "layer2.npy";
    topoprune::write_npy(w2path, oracles::random_layer(4, 6, 3));
    const auto csv = dir / "multi.csv";
    const auto r = run_cli("np --weights " + wpath.string() + " " +
                           w2path.string() + " --csv " + csv.string());
    REQUIRE(r.exit_code == 0);
    const json payload = json::parse(r.out).at("payload");
    REQUIRE(payload.at("layers").size() == 2);
    const double total = payload.at("total_np").get<double>();
    const double sum = payload.at("layers")[0].at("raw_np").get<double>() +
                       payload.at("layers")[1].at("raw_np").get<double>();
    CHECK(total == Catch::Approx(sum).epsilon(1e-15));
    CHECK(fs::exists(dir / "multi_0.csv"));
    CHECK(fs::exists(dir / "multi_1.csv"));
  }

  SECTION("overlap --csv labels both weight lists") {
    const auto csv = dir / "overlap.csv";
    const auto r =
        run_cli("overlap --weights " + wpath.string() + " --csv " + csv.string());
    REQUIRE(r.exit_code == 0);
    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == "set,weight");
    std::size_t mst_rows = 0, top_rows = 0;
    std::string line;
    while (std::getline(in, line)) {
      mst_rows += line.rfind("mst,", 0) == 0;
      top_rows += line.rfind("top_alpha,", 0) == 0;
    }
    CHECK(mst_rows == 19);
    CHECK(top_rows == 19);
  }

  SECTION("prune below alpha with --truncate succeeds") {
    const auto mpath = dir / "mask_trunc.npy";
    const auto r =
        run_cli("prune --weights " + wpath.string() +
                " --keep 10 --method timp --truncate --out " + mpath.string());
    REQUIRE(r.exit_code == 0);
    CHECK(json::parse(r.out).at("payload").at("truncate") == true);
    CHECK(topoprune::read_mask_npy(mpath).nnz == 10);
  }
}

TEST_CASE("run executes a desk-scale T-IMP loop deterministically") {
  const auto dir = scratch_dir();
  const auto arch = dir / "desk.json";
  {
    std::ofstream out(arch);
    out << R"({"layers":[{"type":"dense","in":8,"out":12},)"
        << R"({"type":"dense","in":12,"out":2}]})";
  }
  const std::string cmd = "run --loop timp --arch " + arch.string() +
                          " --sparsity 40 --rounds 2 --iters 25 --seed 7";
  const auto a = run_cli(cmd);
  REQUIRE(a.exit_code == 0);
  const auto b = run_cli(cmd);
  CHECK(a.out == b.out);
  const json payload = json::parse(a.out).at("payload");
  CHECK(payload.at("round_metrics").size() == 2);
  CHECK(payload.at("schedule_warnings").empty());

  // 95% target drives the head layer below its forest size: T-IMP refuses.
  const auto infeasible =
      run_cli("run --loop timp --arch " + arch.string() +
              " --sparsity 95 --rounds 2 --iters 10 --seed 7");
  CHECK(infeasible.exit_code == 3);

  // IMP continues past the critical ratio and records the warning.
  const auto imp = run_cli("run --loop imp --arch " + arch.string() +
                           " --sparsity 95 --rounds 2 --iters 10 --seed 7");
  REQUIRE(imp.exit_code == 0);
  CHECK_FALSE(json::parse(imp.out).at("payload").at("schedule_warnings").empty());
}

TEST_CASE("the paper-literal conv flag changes the reported ratios") {
  const auto corrected = run_cli("eta --arch " + specs("mnist_cnn.json"));
  const auto literal =
      run_cli("eta --arch " + specs("mnist_cnn.json") + " --paper-literal-conv");
  REQUIRE(corrected.exit_code == 0);
  REQUIRE(literal.exit_code == 0);
  const double a = json::parse(corrected.out)
                       .at("payload").at("layers")[0].at("eta_tau").get<double>();
  const double b = json::parse(literal.out)
                       .at("payload").at("layers")[0].at("eta_tau").get<double>();
  CHECK(a == Catch::Approx(4.19251).margin(5e-6));
  CHECK(b == Catch::Approx(729.0 * 9.0 / 1628.0).epsilon(1e-12));
}

TEST_CASE("bound honors the sparse corollary flag") {
  const auto r = run_cli("bound --m 100 --n 10 --sparsity 0.2");
  REQUIRE(r.exit_code == 0);
  CHECK(json::parse(r.out).at("payload").at("bound").get<double>() ==
        Catch::Approx(0.2484116482267293).epsilon(1e-9));
  CHECK(run_cli("bound --m 100 --n 10 --sparsity 0.05").exit_code == 2);
}

TEST_CASE("run accepts NPY feature and label files and writes checkpoints") {
  const auto dir = scratch_dir();
  const auto arch = dir / "file_arch.json";
  {
    std::ofstream out(arch);
    out << R"({"layers":[{"type":"dense","in":4,"out":6},)"
        << R"({"type":"dense","in":6,"out":2}]})";
  }
  topoprune::LayerWeights features(20, 4);
  topoprune::LayerWeights labels(20, 1);
  topoprune::CounterRng rng(5, 0);
  for (std::size_t i = 0; i < 20; ++i) {
    for (std::size_t d = 0; d < 4; ++d)
      features.at(i, d) = rng.uniform01() + (i % 2 ? 1.0 : -1.0);
    labels.at(i, 0) = static_cast<double>(i % 2);
  }
  const auto fpath = dir / "features.npy";
  const auto lpath = dir / "labels.npy";
  topoprune::write_npy(fpath, features);
  topoprune::write_npy(lpath, labels);

  const auto ckpt = dir / "ckpt";
  fs::remove_all(ckpt);
  const auto r = run_cli("run --loop imp --arch " + arch.string() +
                         " --sparsity 30 --rounds 1 --iters 10 --seed 3" +
                         " --features " + fpath.string() + " --labels " +
                         lpath.string() + " --checkpoint-out " + ckpt.string());
  REQUIRE(r.exit_code == 0);
  const json env = json::parse(r.out);
  CHECK(env.at("inputs").size() == 3);
  CHECK(env.at("payload").at("dataset") == "file");
  CHECK(fs::exists(ckpt / "manifest.json"));
  CHECK(fs::exists(ckpt / "layer0_w.npy"));

  // Fractional labels are rejected.
  labels.at(3, 0) = 0.5;
  topoprune::write_npy(lpath, labels);
  CHECK(run_cli("run --loop imp --arch " + arch.string() +
                " --sparsity 30 --rounds 1 --iters 10 --seed 3 --features " +
                fpath.string() + " --labels " + lpath.string())
            .exit_code == 2);
}

TEST_CASE("validation failures exit with code 2") {
  const auto dir = scratch_dir();
  const auto bad = dir / "bad_arch.json";
  {
    std::ofstream out(bad);
    out << R"({"layers":[{"type":"dense","in":8,"out":2,"dropout":0.5}]})";
  }
  CHECK(run_cli("eta --arch " + bad.string()).exit_code == 2);
  CHECK(run_cli("eta --arch " + (dir / "missing.json").string()).exit_code == 2);
  CHECK(run_cli("bound --m 100").exit_code == 2);
  CHECK(run_cli("nonsense").exit_code == 2);
}
