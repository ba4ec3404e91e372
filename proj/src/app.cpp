#include "uagnn/app.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "uagnn/kmeans.hpp"
#include "uagnn/stability.hpp"

namespace uagnn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument("malformed " + what + ": " + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

json hp_to_json_obj(const HyperParams& hp) {
  json j;
  j["layers"] = hp.layers;
  j["hidden_dim"] = hp.hidden_dim;
  j["gamma"] = hp.gamma;
  j["epsilon"] = hp.epsilon;
  j["aggregation"] = aggregation_name(hp.aggregation);
  j["learning_rate"] = hp.learning_rate;
  j["weight_decay"] = hp.weight_decay;
  j["max_epochs"] = hp.max_epochs;
  j["patience"] = hp.patience;
  return j;
}

HyperParams hp_from_json_obj(const json& j) {
  HyperParams hp;
  hp.layers = j.value("layers", hp.layers);
  hp.hidden_dim = j.value("hidden_dim", hp.hidden_dim);
  hp.gamma = j.value("gamma", hp.gamma);
  hp.epsilon = j.value("epsilon", hp.epsilon);
  if (j.contains("aggregation")) hp.aggregation = aggregation_from_name(j["aggregation"]);
  hp.learning_rate = j.value("learning_rate", hp.learning_rate);
  hp.weight_decay = j.value("weight_decay", hp.weight_decay);
  hp.max_epochs = j.value("max_epochs", hp.max_epochs);
  hp.patience = j.value("patience", hp.patience);
  require(hp.layers >= 0 && hp.hidden_dim >= 1 && hp.epsilon > 0 && hp.gamma >= 0 &&
              hp.learning_rate > 0 && hp.weight_decay >= 0 && hp.max_epochs >= 1 &&
              hp.patience >= 1,
          "invalid hyperparameters");
  return hp;
}

json trial_to_json(int index, const TrialResult& trial, Metric metric,
                   const std::vector<std::uint64_t>& seeds, int k) {
  json j;
  j["trial"] = index;
  j["hp"] = hp_to_json_obj(trial.hp);
  j["failed"] = trial.failed;
  j["per_seed"] = trial.per_seed;
  json reports = json::array();
  for (std::size_t s = 0; s < trial.per_seed.size(); ++s)
    reports.push_back(
        json::parse(metric_report_json(metric, trial.per_seed[s], seeds[s], "validation", k)));
  j["reports"] = reports;
  j["mean"] = trial.mean;
  j["wall_seconds"] = trial.wall_seconds;
  return j;
}

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

// Sample standard deviation (n - 1 denominator); 0 for a single value.
double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double mu = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - mu) * (x - mu);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

}  // namespace

std::vector<std::uint64_t> default_seeds() {
  return {42, 24, 976, 12345, 8765, 7, 856, 90, 672, 785};
}

std::string hyperparams_to_json(const HyperParams& hp) { return hp_to_json_obj(hp).dump(); }

HyperParams hyperparams_from_json_text(const std::string& text) {
  return hp_from_json_obj(parse_json(text, "hyperparameters"));
}

void RunConfig::validate_for(const std::string& command) const {
  require(!(dataset && generator), "config: dataset and generator are mutually exclusive");
  require(!seeds.empty(), "config: seeds must be non-empty");
  if (command == "generate") {
    require(generator.has_value(), "generate: config needs a generator spec");
  } else {
    require(dataset || generator, "config: one of dataset / generator is required");
  }
  if (command == "train") require(hp.has_value(), "train: config needs hyperparameters");
  if (command == "sweep") require(budget >= 1, "sweep: budget must be >= 1");
}

RunConfig config_from_json_text(const std::string& text) {
  const json j = parse_json(text, "config");
  RunConfig c;
  c.seeds = default_seeds();
  if (j.contains("dataset")) c.dataset = j["dataset"].get<std::string>();
  if (j.contains("generator")) {
    const json& g = j["generator"];
    GeneratorSpec spec;
    spec.n = g.value("n", 0);
    spec.k = g.value("k", 0);
    spec.p_in = g.value("p_in", 0.0);
    spec.p_out = g.value("p_out", 0.0);
    spec.feature_dim = g.value("feature_dim", spec.feature_dim);
    spec.feature_shift = g.value("feature_shift", spec.feature_shift);
    spec.seed = g.value("seed", spec.seed);
    c.generator = spec;
  }
  if (j.contains("split")) {
    const json& s = j["split"];
    c.split_fractions = {s.value("train", 0.64), s.value("val", 0.16), s.value("test", 0.20)};
    c.split_seed = s.value("seed", c.split_seed);
  }
  if (j.contains("hp")) c.hp = hp_from_json_obj(j["hp"]);
  if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  if (j.contains("metric")) c.metric = metric_from_name(j["metric"]);
  if (j.contains("out")) c.out_dir = j["out"].get<std::string>();
  if (j.contains("sweep")) {
    const json& s = j["sweep"];
    c.budget = s.value("budget", c.budget);
    c.sweep_rng_seed = s.value("rng_seed", c.sweep_rng_seed);
    c.grids.max_epochs = s.value("max_epochs", c.grids.max_epochs);
    c.grids.patience = s.value("patience", c.grids.patience);
    if (s.contains("layers")) c.grids.layers = s["layers"].get<std::vector<int>>();
    if (s.contains("hidden_dims"))
      c.grids.hidden_dims = s["hidden_dims"].get<std::vector<int>>();
    if (s.contains("gammas")) c.grids.gammas = s["gammas"].get<std::vector<double>>();
    if (s.contains("epsilons")) c.grids.epsilons = s["epsilons"].get<std::vector<double>>();
    if (s.contains("learning_rates"))
      c.grids.learning_rates = s["learning_rates"].get<std::vector<double>>();
    if (s.contains("weight_decays"))
      c.grids.weight_decays = s["weight_decays"].get<std::vector<double>>();
    if (s.contains("aggregations")) {
      c.grids.aggregations.clear();
      for (const auto& name : s["aggregations"])
        c.grids.aggregations.push_back(aggregation_from_name(name));
    }
  }
  if (j.contains("diagnose")) {
    const json& d = j["diagnose"];
    if (d.contains("params")) c.params_path = d["params"].get<std::string>();
    c.init_seed = d.value("init_seed", c.init_seed);
    c.sensitivity_source = d.value("source", c.sensitivity_source);
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  return config_from_json_text(read_file(path));
}

Graph resolve_graph(const RunConfig& config) {
  if (config.dataset) return load_graph(*config.dataset);
  require(config.generator.has_value(), "no dataset or generator configured");
  const GeneratorSpec& s = *config.generator;
  return generate_sbm(s.n, s.k, s.p_in, s.p_out, s.feature_dim, s.feature_shift, s.seed);
}

void cmd_generate(const RunConfig& config) {
  config.validate_for("generate");
  const GeneratorSpec& spec = *config.generator;
  // Generate before touching the filesystem so invalid specs write nothing.
  const Graph g = generate_sbm(spec.n, spec.k, spec.p_in, spec.p_out, spec.feature_dim,
                               spec.feature_shift, spec.seed);
  save_graph(g, config.out_dir);

  json manifest;
  manifest["n"] = g.n;
  manifest["d"] = g.feature_dim();
  manifest["k"] = g.num_classes();
  manifest["edges"] = g.edges.size();
  manifest["homophily"] = g.edges.empty() ? json() : json(homophily(g));
  manifest["seed"] = spec.seed;
  write_file(config.out_dir + "/manifest.json", manifest.dump(2) + "\n");
}

void cmd_train(const RunConfig& config) {
  config.validate_for("train");
  const Graph g = resolve_graph(config);
  require(g.labels.has_value(), "train: dataset has no labels (needed for k and metrics)");
  const HyperParams hp = *config.hp;
  const int k = g.num_classes();
  fs::create_directories(config.out_dir);

  // Test-time protocol: message passing and conductance on the full edge set.
  const SparseMatrix test_op = build_operator(g, g.edges, hp.aggregation);

  std::vector<double> f1s, nmis, conds;
  std::vector<std::uint64_t> ok_seeds, failed_seeds;
  for (std::uint64_t seed : config.seeds) {
    json per_seed;
    try {
      const EdgeSplit split = split_edges(g, config.split_fractions, seed);
      const TrainResult run = train(g, split, hp, seed);
      const DenseMatrix xl = encode_values(run.params, test_op, g.features, hp);
      const Partition part = kmeans(xl, k, kKmeansRestarts, 300, 1e-6, seed);

      per_seed["f1"] = macro_f1(part, *g.labels);
      per_seed["nmi"] = nmi(part, *g.labels);
      per_seed["conductance"] = conductance(part, g);
      per_seed["loss_final"] = run.loss_history.back();
      per_seed["epochs_run"] = run.loss_history.size();

      f1s.push_back(per_seed["f1"].get<double>());
      nmis.push_back(per_seed["nmi"].get<double>());
      conds.push_back(per_seed["conductance"].get<double>());
      ok_seeds.push_back(seed);
      save_params(run.params, config.out_dir + "/params_seed_" + std::to_string(seed) + ".json");
      save_partition(part, config.out_dir + "/partition_seed_" + std::to_string(seed) + ".txt",
                     seed);
    } catch (const DivergenceError& e) {
      per_seed = {{"failed", true}, {"error", e.what()}};
      failed_seeds.push_back(seed);
    }
    write_file(config.out_dir + "/seed_" + std::to_string(seed) + ".json",
               per_seed.dump(2) + "\n");
  }

  json summary;
  summary["k"] = k;
  summary["hp"] = json::parse(hyperparams_to_json(hp));
  summary["seeds"] = ok_seeds;
  summary["failed_seeds"] = failed_seeds;
  summary["has_failures"] = !failed_seeds.empty();
  if (!ok_seeds.empty()) {
    summary["metrics"] = {
        {"f1", {{"mean", mean_of(f1s)}, {"std", sample_std(f1s)}}},
        {"nmi", {{"mean", mean_of(nmis)}, {"std", sample_std(nmis)}}},
        {"conductance", {{"mean", mean_of(conds)}, {"std", sample_std(conds)}}},
    };
  }
  write_file(config.out_dir + "/summary.json", summary.dump(2) + "\n");
}

void cmd_sweep(const RunConfig& config) {
  config.validate_for("sweep");
  const Graph g = resolve_graph(config);
  require(g.labels.has_value(), "sweep: dataset has no labels");
  fs::create_directories(config.out_dir);
  const std::string log_path = config.out_dir + "/trials.jsonl";

  const EdgeSplit split = split_edges(g, config.split_fractions, config.split_seed);
  const std::vector<HyperParams> sequence =
      sample_hyperparams(config.grids, config.budget, config.sweep_rng_seed);
  const int k = g.num_classes();

  // Resume: lines already in the log count against the budget and are kept.
  std::vector<json> lines;
  if (fs::exists(log_path)) {
    std::ifstream in(log_path);
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) lines.push_back(parse_json(line, "trial log line"));
  }
  require(static_cast<int>(lines.size()) <= config.budget,
          "sweep: existing log exceeds budget");

  {
    std::ofstream out(log_path, std::ios::app);
    if (!out) throw std::runtime_error("cannot write " + log_path);
    for (int i = static_cast<int>(lines.size()); i < config.budget; ++i) {
      const TrialResult trial = run_trial(g, split, sequence[i], config.metric, config.seeds);
      const json line = trial_to_json(i, trial, config.metric, config.seeds, k);
      out << line.dump() << '\n';
      out.flush();
      lines.push_back(line);
    }
  }

  std::vector<TrialResult> trials;
  for (const json& line : lines) {
    TrialResult t;
    t.hp = hp_from_json_obj(line["hp"]);
    t.failed = line["failed"].get<bool>();
    t.per_seed = line["per_seed"].get<std::vector<double>>();
    t.mean = line["mean"].get<double>();
    trials.push_back(t);
  }
  const int best = best_trial_index(trials, config.metric);
  if (best < 0) throw std::runtime_error("sweep: budget exhausted with zero successes");

  json best_doc;
  best_doc["trial"] = best;
  best_doc["metric"] = metric_name(config.metric);
  best_doc["mean"] = trials[best].mean;
  best_doc["hp"] = json::parse(hyperparams_to_json(trials[best].hp));
  write_file(config.out_dir + "/best_hp.json", best_doc.dump(2) + "\n");
}

void cmd_diagnose(const RunConfig& config) {
  config.validate_for("diagnose");
  const Graph g = resolve_graph(config);
  const HyperParams hp = config.hp.value_or(HyperParams{});
  fs::create_directories(config.out_dir);

  ModelParams params;
  if (config.params_path) {
    try {
      params = load_params(*config.params_path);
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("malformed parameters file: " + std::string(e.what()));
    }
    require(params.node_count() == g.n && params.input_dim() == g.feature_dim(),
            "parameters file does not match the dataset dimensions");
  } else {
    params = init_params(g.feature_dim(), hp.hidden_dim, g.n, config.init_seed);
  }

  const SpectrumReport spectrum = effective_spectrum(params.w, hp.gamma);
  const Regime regime = classify_regime(spectrum, 1e-6);
  json spec_doc;
  spec_doc["singular_values"] = spectrum.singular_values;
  spec_doc["gamma"] = spectrum.gamma;
  spec_doc["real_part"] = spectrum.real_part;
  spec_doc["max_real_deviation"] = spectrum.max_real_deviation;
  spec_doc["regime"] = regime_name(regime);
  write_file(config.out_dir + "/spectrum.json", spec_doc.dump(2) + "\n");

  const SensitivityProfile profile =
      sensitivity_profile(params, g, hp, config.sensitivity_source);
  json prof_doc;
  prof_doc["source"] = profile.source;
  prof_doc["model_tag"] = profile.model_tag;
  prof_doc["distances"] = profile.distances;
  prof_doc["influence"] = profile.influence;
  prof_doc["nodes_at_distance"] = profile.nodes_at_distance;
  write_file(config.out_dir + "/sensitivity.json", prof_doc.dump(2) + "\n");

  std::ostringstream csv;
  csv << "distance,influence,nodes\n";
  for (std::size_t i = 0; i < profile.distances.size(); ++i)
    csv << profile.distances[i] << ',' << profile.influence[i] << ','
        << profile.nodes_at_distance[i] << '\n';
  write_file(config.out_dir + "/sensitivity.csv", csv.str());
}

}  // namespace uagnn
