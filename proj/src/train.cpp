#include "uagnn/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "uagnn/kmeans.hpp"
#include "uagnn/rng.hpp"

namespace uagnn {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

AdamState AdamState::like(const ModelParams& params) {
  AdamState s;
  for (const DenseMatrix* p : params.matrices()) {
    s.m.emplace_back(p->rows, p->cols);
    s.v.emplace_back(p->rows, p->cols);
  }
  return s;
}

void adam_step(ModelParams& params, const std::vector<DenseMatrix>& grads,
               AdamState& state, double lr, double wd) {
  auto mats = params.matrices();
  require(grads.size() == mats.size(), "adam_step: gradient count mismatch");
  ++state.t;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < mats.size(); ++i) {
    DenseMatrix& theta = *mats[i];
    require(grads[i].same_shape(theta), "adam_step: gradient shape mismatch");
    if (!all_finite(grads[i])) throw std::invalid_argument("adam_step: non-finite gradient");
    for (std::size_t e = 0; e < theta.data.size(); ++e) {
      const double g = grads[i].data[e] + wd * theta.data[e];
      double& m = state.m[i].data[e];
      double& v = state.v[i].data[e];
      m = state.beta1 * m + (1.0 - state.beta1) * g;
      v = state.beta2 * v + (1.0 - state.beta2) * g * g;
      const double m_hat = m / bc1;
      const double v_hat = v / bc2;
      theta.data[e] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
  }
}

void adam_step_scalar(double& theta, double grad, double& m, double& v, long& t,
                      double lr, double wd, double beta1, double beta2, double eps) {
  ++t;
  const double g = grad + wd * theta;
  m = beta1 * m + (1.0 - beta1) * g;
  v = beta2 * v + (1.0 - beta2) * g * g;
  const double m_hat = m / (1.0 - std::pow(beta1, static_cast<double>(t)));
  const double v_hat = v / (1.0 - std::pow(beta2, static_cast<double>(t)));
  theta -= lr * m_hat / (std::sqrt(v_hat) + eps);
}

SparseMatrix build_operator(const Graph& g, const std::vector<Edge>& edges,
                            Aggregation agg) {
  SparseMatrix adj = to_adjacency(g, edges);
  return agg == Aggregation::Phi1 ? adj : normalize_sym(adj);
}

Graph subgraph_with_edges(const Graph& g, const std::vector<Edge>& edges) {
  Graph sub = g;
  sub.edges = edges;
  std::sort(sub.edges.begin(), sub.edges.end());
  return sub;
}

TrainResult train(const Graph& g, const EdgeSplit& split, const HyperParams& hp,
                  std::uint64_t seed) {
  require(!split.train.empty(), "train: empty training edge set");
  const auto start = std::chrono::steady_clock::now();

  const SparseMatrix op = build_operator(g, split.train, hp.aggregation);
  const DenseMatrix a_target = dense_adjacency_target(g.n, split.train);

  TrainResult result;
  result.seed = seed;
  result.hp = hp;
  result.params = init_params(g.feature_dim(), hp.hidden_dim, g.n, seed);
  AdamState adam = AdamState::like(result.params);

  constexpr double kMinDelta = 1e-6;
  double best_loss = std::numeric_limits<double>::infinity();
  int stall = 0;
  for (int epoch = 0; epoch < hp.max_epochs; ++epoch) {
    Tape tape;
    ModelVars vars = make_leaves(tape, result.params);
    EncoderOutput enc;
    try {
      enc = encode(vars, op, g.features, hp, tape);
    } catch (const DivergenceError& e) {
      throw DivergenceError(std::string(e.what()) + " at epoch " + std::to_string(epoch),
                            e.layer, epoch);
    }
    DecoderOutput rec = decode(vars, enc.xl, tape);
    Variable loss = reconstruction_loss(a_target, g.features, rec, tape);

    const double loss_value = loss.value()(0, 0);
    if (!std::isfinite(loss_value))
      throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch), -1, epoch);
    result.loss_history.push_back(loss_value);

    if (loss_value < best_loss - kMinDelta) {
      best_loss = loss_value;
      result.best_epoch = epoch;
      stall = 0;
    } else {
      if (loss_value < best_loss) {
        best_loss = loss_value;
        result.best_epoch = epoch;
      }
      ++stall;
      if (stall >= hp.patience) break;
    }

    tape.backward(loss);
    std::vector<DenseMatrix> grads;
    for (const Variable& leaf : vars.all()) grads.push_back(tape.grad(leaf));
    adam_step(result.params, grads, adam, hp.learning_rate, hp.weight_decay);
  }

  result.wall_seconds = seconds_since(start);
  return result;
}

SweepGrids SweepGrids::defaults() {
  SweepGrids g;
  g.layers = {1, 2, 3, 5, 10, 20, 30};
  g.hidden_dims = {32, 64, 128};
  g.gammas = {0.0001, 0.001, 0.01, 0.1, 1.0};
  g.epsilons = {0.0001, 0.001, 0.01, 0.1, 1.0};
  g.aggregations = {Aggregation::Phi1, Aggregation::Phi2};
  g.learning_rates = {0.05, 0.01, 0.005, 0.001, 0.0005, 0.0001};
  g.weight_decays = {0.05, 0.005, 0.0005, 0.0};
  return g;
}

long SweepGrids::size() const {
  return static_cast<long>(layers.size()) * hidden_dims.size() * gammas.size() *
         epsilons.size() * aggregations.size() * learning_rates.size() *
         weight_decays.size();
}

std::vector<HyperParams> sample_hyperparams(const SweepGrids& grids, int budget,
                                            std::uint64_t rng_seed) {
  require(budget >= 1, "sample_hyperparams: budget must be >= 1");
  const long grid_size = grids.size();
  require(grid_size > 0, "sample_hyperparams: empty grid");

  Rng rng(rng_seed);
  std::set<long> used;
  std::vector<HyperParams> out;
  out.reserve(budget);
  for (int trial = 0; trial < budget; ++trial) {
    long flat = static_cast<long>(rng.uniform_int(static_cast<std::uint64_t>(grid_size)));
    if (static_cast<long>(used.size()) < grid_size) {
      while (used.count(flat))
        flat = static_cast<long>(rng.uniform_int(static_cast<std::uint64_t>(grid_size)));
      used.insert(flat);
    }
    HyperParams hp;
    hp.layers = grids.layers[flat % grids.layers.size()];
    flat /= grids.layers.size();
    hp.hidden_dim = grids.hidden_dims[flat % grids.hidden_dims.size()];
    flat /= grids.hidden_dims.size();
    hp.gamma = grids.gammas[flat % grids.gammas.size()];
    flat /= grids.gammas.size();
    hp.epsilon = grids.epsilons[flat % grids.epsilons.size()];
    flat /= grids.epsilons.size();
    hp.aggregation = grids.aggregations[flat % grids.aggregations.size()];
    flat /= grids.aggregations.size();
    hp.learning_rate = grids.learning_rates[flat % grids.learning_rates.size()];
    flat /= grids.learning_rates.size();
    hp.weight_decay = grids.weight_decays[flat % grids.weight_decays.size()];
    hp.max_epochs = grids.max_epochs;
    hp.patience = grids.patience;
    out.push_back(hp);
  }
  return out;
}

TrialResult run_trial(const Graph& g, const EdgeSplit& split, const HyperParams& hp,
                      Metric metric, const std::vector<std::uint64_t>& seeds) {
  require(g.labels.has_value(), "run_trial: validation metric needs labels");
  require(!seeds.empty(), "run_trial: empty seed list");
  const auto start = std::chrono::steady_clock::now();

  TrialResult trial;
  trial.hp = hp;

  // Model selection sees train + validation edges.
  std::vector<Edge> val_edges = split.train;
  val_edges.insert(val_edges.end(), split.validation.begin(), split.validation.end());
  const Graph val_graph = subgraph_with_edges(g, val_edges);
  const SparseMatrix val_op = build_operator(g, val_edges, hp.aggregation);
  const int k = g.num_classes();

  try {
    for (std::uint64_t seed : seeds) {
      TrainResult run = train(g, split, hp, seed);
      const DenseMatrix xl = encode_values(run.params, val_op, g.features, hp);
      const Partition part = kmeans(xl, k, kKmeansRestarts, 300, 1e-6, seed);
      trial.per_seed.push_back(evaluate_metric(metric, part, *g.labels, val_graph));
    }
    double sum = 0.0;
    for (double v : trial.per_seed) sum += v;
    trial.mean = sum / static_cast<double>(trial.per_seed.size());
  } catch (const DivergenceError&) {
    trial.failed = true;
    trial.per_seed.clear();
  }
  trial.wall_seconds = seconds_since(start);
  return trial;
}

int best_trial_index(const std::vector<TrialResult>& trials, Metric metric) {
  int best = -1;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    if (trials[i].failed) continue;
    if (best < 0) {
      best = static_cast<int>(i);
      continue;
    }
    const bool better = metric_higher_is_better(metric)
                            ? trials[i].mean > trials[best].mean
                            : trials[i].mean < trials[best].mean;
    if (better) best = static_cast<int>(i);
  }
  return best;
}

SweepResult random_search(const Graph& g, const EdgeSplit& split, Metric metric,
                          int budget, const std::vector<std::uint64_t>& seeds,
                          std::uint64_t rng_seed, const SweepGrids& grids) {
  const std::vector<HyperParams> sequence = sample_hyperparams(grids, budget, rng_seed);
  SweepResult result;
  for (const HyperParams& hp : sequence) {
    result.trials.push_back(run_trial(g, split, hp, metric, seeds));
    ++result.budget_used;
  }
  result.best_index = best_trial_index(result.trials, metric);
  if (result.best_index < 0) throw std::runtime_error("random_search: all trials failed");
  return result;
}

}  // namespace uagnn
