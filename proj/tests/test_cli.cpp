#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "test_helpers.hpp"
#include "uagnn/app.hpp"

using namespace uagnn;
using nlohmann::json;
using testutil::TempDir;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(UAGNN_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int line_count(const std::string& path) {
  std::ifstream in(path);
  int count = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++count;
  return count;
}

// Small, fast SBM config shared by the train/sweep tests.
json base_config(const std::string& out) {
  json cfg;
  cfg["generator"] = {{"n", 24},          {"k", 2},   {"p_in", 0.5}, {"p_out", 0.05},
                      {"feature_dim", 3}, {"feature_shift", 2.0},    {"seed", 13}};
  cfg["split"] = {{"train", 0.64}, {"val", 0.16}, {"test", 0.20}, {"seed", 1}};
  cfg["hp"] = {{"layers", 2},      {"hidden_dim", 8},     {"gamma", 0.1},
               {"epsilon", 0.1},   {"aggregation", "phi2"}, {"learning_rate", 0.01},
               {"weight_decay", 0.0}, {"max_epochs", 30},  {"patience", 30}};
  cfg["seeds"] = {3};
  cfg["out"] = out;
  return cfg;
}

std::string write_config(const TempDir& dir, const json& cfg, const std::string& name) {
  const std::string path = dir.str() + "/" + name;
  std::ofstream out(path);
  out << cfg.dump(2);
  return path;
}

}  // namespace

TEST_CASE("generate writes the dataset plus manifest and is byte-deterministic") {
  TempDir dir("cli_gen");
  const std::string out1 = dir.str() + "/d1";
  const std::string out2 = dir.str() + "/d2";
  const std::string flags =
      "generate --n 200 --k 2 --p-in 0.02 --p-out 0.10 --feature-dim 4 "
      "--feature-shift 1.0 --seed 7 --out ";
  REQUIRE(run_cli(flags + out1) == 0);
  REQUIRE(run_cli(flags + out2) == 0);

  for (const char* name : {"edges.tsv", "features.csv", "labels.txt", "manifest.json"}) {
    CHECK(fs::exists(out1 + "/" + name));
    CHECK(slurp(out1 + "/" + name) == slurp(out2 + "/" + name));
  }
  const json manifest = json::parse(slurp(out1 + "/manifest.json"));
  CHECK(manifest["n"] == 200);
  CHECK(manifest["homophily"].get<double>() < 0.25);
}

TEST_CASE("generate rejects an invalid spec and writes nothing") {
  TempDir dir("cli_gen_bad");
  const std::string out = dir.str() + "/bad";
  CHECK(run_cli("generate --n 201 --k 2 --p-in 0.1 --p-out 0.1 --out " + out) == 1);
  CHECK(!fs::exists(out));
}

TEST_CASE("train emits the per-seed schema and is end-to-end deterministic") {
  TempDir dir("cli_train");
  json cfg = base_config(dir.str() + "/run1");
  const std::string config_path = write_config(dir, cfg, "config.json");
  REQUIRE(run_cli("train --config " + config_path) == 0);

  const json per_seed = json::parse(slurp(dir.str() + "/run1/seed_3.json"));
  std::set<std::string> keys;
  for (const auto& [key, value] : per_seed.items()) keys.insert(key);
  CHECK(keys == std::set<std::string>{"f1", "nmi", "conductance", "loss_final", "epochs_run"});
  for (const char* m : {"f1", "nmi", "conductance"}) {
    CHECK(per_seed[m].get<double>() >= 0.0);
    CHECK(per_seed[m].get<double>() <= 1.0);
  }

  // Second run with identical config: identical metric values.
  REQUIRE(run_cli("train --config " + config_path + " --out " + dir.str() + "/run2") == 0);
  CHECK(slurp(dir.str() + "/run1/seed_3.json") == slurp(dir.str() + "/run2/seed_3.json"));

  const json summary = json::parse(slurp(dir.str() + "/run1/summary.json"));
  CHECK(summary["metrics"].contains("nmi"));
  CHECK(summary["failed_seeds"].empty());
}

TEST_CASE("train summary uses the n-1 standard deviation over seeds") {
  TempDir dir("cli_train_std");
  json cfg = base_config(dir.str() + "/run");
  cfg["seeds"] = {3, 4, 5};
  const std::string config_path = write_config(dir, cfg, "config.json");
  REQUIRE(run_cli("train --config " + config_path) == 0);

  std::vector<double> nmis;
  for (int seed : {3, 4, 5})
    nmis.push_back(json::parse(slurp(dir.str() + "/run/seed_" + std::to_string(seed) +
                                     ".json"))["nmi"]
                       .get<double>());
  double mean = (nmis[0] + nmis[1] + nmis[2]) / 3.0;
  double var = 0.0;
  for (double v : nmis) var += (v - mean) * (v - mean);
  const double expected_std = std::sqrt(var / 2.0);

  const json summary = json::parse(slurp(dir.str() + "/run/summary.json"));
  CHECK(summary["metrics"]["nmi"]["mean"].get<double>() == doctest::Approx(mean).epsilon(1e-12));
  CHECK(summary["metrics"]["nmi"]["std"].get<double>() ==
        doctest::Approx(expected_std).epsilon(1e-12));
}

TEST_CASE("sweep writes one line per trial, resumes, and reports the argbest") {
  TempDir dir("cli_sweep");
  json cfg = base_config(dir.str() + "/sweep");
  cfg.erase("hp");
  cfg["metric"] = "nmi";
  cfg["sweep"] = {{"budget", 5},
                  {"rng_seed", 11},
                  {"max_epochs", 15},
                  {"patience", 15},
                  {"layers", json::array({1, 2})},
                  {"hidden_dims", json::array({8})},
                  {"gammas", json::array({0.1})},
                  {"epsilons", json::array({0.1, 0.01})},
                  {"learning_rates", json::array({0.01})},
                  {"weight_decays", json::array({0.0})}};
  const std::string config_path = write_config(dir, cfg, "config.json");

  SUBCASE("full budget in one go") {
    REQUIRE(run_cli("sweep --config " + config_path) == 0);
    const std::string log = dir.str() + "/sweep/trials.jsonl";
    CHECK(line_count(log) == 5);

    // best_hp.json matches the argbest line of the log.
    const json best = json::parse(slurp(dir.str() + "/sweep/best_hp.json"));
    double best_mean = -1.0;
    json best_line;
    std::ifstream in(log);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json trial = json::parse(line);
      if (!trial["failed"].get<bool>() && trial["mean"].get<double>() > best_mean) {
        best_mean = trial["mean"].get<double>();
        best_line = trial;
      }
    }
    CHECK(best["mean"].get<double>() == best_mean);
    CHECK(best["hp"] == best_line["hp"]);
    CHECK(best["trial"] == best_line["trial"]);
  }
  SUBCASE("two fresh sweeps agree on the selected hyperparameters") {
    json c1 = cfg;
    c1["out"] = dir.str() + "/sweep_a";
    json c2 = cfg;
    c2["out"] = dir.str() + "/sweep_b";
    REQUIRE(run_cli("sweep --config " + write_config(dir, c1, "config_a.json")) == 0);
    REQUIRE(run_cli("sweep --config " + write_config(dir, c2, "config_b.json")) == 0);
    CHECK(slurp(dir.str() + "/sweep_a/best_hp.json") ==
          slurp(dir.str() + "/sweep_b/best_hp.json"));
  }
  SUBCASE("resume appends only the missing trials") {
    json small = cfg;
    small["sweep"]["budget"] = 3;
    const std::string small_path = write_config(dir, small, "config_small.json");
    REQUIRE(run_cli("sweep --config " + small_path) == 0);
    CHECK(line_count(dir.str() + "/sweep/trials.jsonl") == 3);
    const std::string first_three = slurp(dir.str() + "/sweep/trials.jsonl");

    REQUIRE(run_cli("sweep --config " + config_path) == 0);
    CHECK(line_count(dir.str() + "/sweep/trials.jsonl") == 5);
    // The first three lines are untouched.
    CHECK(slurp(dir.str() + "/sweep/trials.jsonl").substr(0, first_three.size()) ==
          first_three);
  }
}

TEST_CASE("diagnose reports the regime and a CSV row per BFS distance") {
  TempDir dir("cli_diag");
  json cfg;
  cfg["generator"] = {{"n", 12},          {"k", 2},   {"p_in", 0.9}, {"p_out", 0.2},
                      {"feature_dim", 3}, {"feature_shift", 1.0},    {"seed", 4}};
  cfg["hp"] = {{"layers", 3}, {"hidden_dim", 6}, {"gamma", 0.0}, {"epsilon", 0.1},
               {"aggregation", "phi1"}, {"learning_rate", 0.01}};
  cfg["out"] = dir.str() + "/diag";
  const std::string config_path = write_config(dir, cfg, "config.json");

  SUBCASE("gamma 0 is non-dissipative") {
    REQUIRE(run_cli("diagnose --config " + config_path) == 0);
    const json spectrum = json::parse(slurp(dir.str() + "/diag/spectrum.json"));
    CHECK(spectrum["regime"] == "NON_DISSIPATIVE");

    // CSV: header plus one row per BFS distance present from the source.
    const json prof = json::parse(slurp(dir.str() + "/diag/sensitivity.json"));
    const int rows = line_count(dir.str() + "/diag/sensitivity.csv");
    CHECK(rows == 1 + prof["distances"].size());
  }
  SUBCASE("gamma 1 is dissipative") {
    cfg["hp"]["gamma"] = 1.0;
    const std::string path = write_config(dir, cfg, "config_g1.json");
    REQUIRE(run_cli("diagnose --config " + path) == 0);
    const json spectrum = json::parse(slurp(dir.str() + "/diag/spectrum.json"));
    CHECK(spectrum["regime"] == "DISSIPATIVE");
  }
  SUBCASE("malformed parameters file is a validation error") {
    const std::string bad = dir.str() + "/bad_params.json";
    testutil::write_text(bad, "{ not json");
    CHECK(run_cli("diagnose --config " + config_path + " --params " + bad) == 1);
  }
}

TEST_CASE("missing required config is a validation error (exit 1)") {
  CHECK(run_cli("train") == 1);
  CHECK(run_cli("sweep") == 1);
}

TEST_CASE("a dataset directory that cannot be opened is a runtime failure (exit 2)") {
  TempDir dir("cli_exit2");
  json cfg = base_config(dir.str() + "/out");
  cfg.erase("generator");
  cfg["dataset"] = dir.str() + "/no_such_dataset";
  const std::string config_path = write_config(dir, cfg, "config.json");
  CHECK(run_cli("train --config " + config_path) == 2);
}

TEST_CASE("train emits partition files in the 1-indexed text format") {
  TempDir dir("cli_partition");
  json cfg = base_config(dir.str() + "/run");
  const std::string config_path = write_config(dir, cfg, "config.json");
  REQUIRE(run_cli("train --config " + config_path) == 0);

  const std::string partition = slurp(dir.str() + "/run/partition_seed_3.txt");
  std::stringstream ss(partition);
  int id, count = 0;
  while (ss >> id) {
    CHECK(id >= 1);
    CHECK(id <= 2);
    ++count;
  }
  CHECK(count == 24);
  const json summary = json::parse(slurp(dir.str() + "/run/partition_seed_3.txt.json"));
  CHECK(summary["k"] == 2);
  CHECK(summary["seed"] == 3);
}
