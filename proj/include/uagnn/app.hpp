#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "uagnn/graph.hpp"
#include "uagnn/metrics.hpp"
#include "uagnn/model.hpp"
#include "uagnn/train.hpp"

namespace uagnn {

struct GeneratorSpec {
  int n = 0;
  int k = 0;
  double p_in = 0.0;
  double p_out = 0.0;
  int feature_dim = 8;
  double feature_shift = 1.0;
  std::uint64_t seed = 0;
};

// Everything one command invocation needs. Parsed from the JSON config file;
// individual CLI flags override their config counterparts.
struct RunConfig {
  std::optional<std::string> dataset;
  std::optional<GeneratorSpec> generator;
  std::array<double, 3> split_fractions{0.64, 0.16, 0.20};
  std::uint64_t split_seed = 0;
  std::optional<HyperParams> hp;
  SweepGrids grids = SweepGrids::defaults();
  int budget = 60;
  std::uint64_t sweep_rng_seed = 0;
  Metric metric = Metric::Nmi;
  std::vector<std::uint64_t> seeds;  // defaults to the standard ten
  std::string out_dir = "out";
  std::optional<std::string> params_path;  // diagnose: trained parameters
  std::uint64_t init_seed = 0;             // diagnose: fresh-init fallback
  int sensitivity_source = 0;

  void validate_for(const std::string& command) const;
};

std::vector<std::uint64_t> default_seeds();

RunConfig config_from_json_text(const std::string& text);
RunConfig load_config(const std::string& path);

std::string hyperparams_to_json(const HyperParams& hp);
HyperParams hyperparams_from_json_text(const std::string& text);

/// Loads the dataset directory or materializes the generator spec.
Graph resolve_graph(const RunConfig& config);

// Command results are written under config.out_dir; see README for schemas.
void cmd_generate(const RunConfig& config);
void cmd_train(const RunConfig& config);
void cmd_sweep(const RunConfig& config);
void cmd_diagnose(const RunConfig& config);

}  // namespace uagnn
