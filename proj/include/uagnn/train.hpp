#pragma once

#include <cstdint>
#include <vector>

#include "uagnn/graph.hpp"
#include "uagnn/metrics.hpp"
#include "uagnn/model.hpp"

namespace uagnn {

// Adam moment accumulators, one pair per ModelParams matrix (same order).
struct AdamState {
  std::vector<DenseMatrix> m;
  std::vector<DenseMatrix> v;
  long t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState like(const ModelParams& params);
};

/// One Adam update. Weight decay is added to the gradient before the moment
/// updates (classic coupling).
void adam_step(ModelParams& params, const std::vector<DenseMatrix>& grads,
               AdamState& state, double lr, double wd);

/// Scalar convenience used by tests and simple probes.
void adam_step_scalar(double& theta, double grad, double& m, double& v, long& t,
                      double lr, double wd = 0.0, double beta1 = 0.9,
                      double beta2 = 0.999, double eps = 1e-8);

struct TrainResult {
  ModelParams params;
  std::vector<double> loss_history;
  int best_epoch = 0;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  HyperParams hp;
};

/// Full-batch reconstruction training on the train edge set. Early-stops
/// after `hp.patience` epochs without an improvement of at least 1e-6.
/// Throws DivergenceError on a non-finite loss.
TrainResult train(const Graph& g, const EdgeSplit& split, const HyperParams& hp,
                  std::uint64_t seed);

/// Builds the propagation operator an HyperParams expects over an edge set.
SparseMatrix build_operator(const Graph& g, const std::vector<Edge>& edges,
                            Aggregation agg);

/// Copy of g restricted to an edge subset (features/labels unchanged).
Graph subgraph_with_edges(const Graph& g, const std::vector<Edge>& edges);

struct SweepGrids {
  std::vector<int> layers;
  std::vector<int> hidden_dims;
  std::vector<double> gammas;
  std::vector<double> epsilons;
  std::vector<Aggregation> aggregations;
  std::vector<double> learning_rates;
  std::vector<double> weight_decays;
  int max_epochs = 5000;
  int patience = 100;

  static SweepGrids defaults();
  long size() const;
};

struct TrialResult {
  HyperParams hp;
  std::vector<double> per_seed;  // empty when failed
  double mean = 0.0;
  bool failed = false;
  double wall_seconds = 0.0;
};

struct SweepResult {
  std::vector<TrialResult> trials;
  int best_index = -1;  // argbest mean among non-failed trials
  int budget_used = 0;
};

/// Deterministic trial sequence: uniform over the grid cross-product without
/// replacement, falling back to with-replacement once the grid is exhausted.
std::vector<HyperParams> sample_hyperparams(const SweepGrids& grids, int budget,
                                            std::uint64_t rng_seed);

/// Evaluates one hyperparameter point: trains per seed, clusters on the
/// train+validation operator, scores the metric against labels.
TrialResult run_trial(const Graph& g, const EdgeSplit& split, const HyperParams& hp,
                      Metric metric, const std::vector<std::uint64_t>& seeds);

SweepResult random_search(const Graph& g, const EdgeSplit& split, Metric metric,
                          int budget, const std::vector<std::uint64_t>& seeds,
                          std::uint64_t rng_seed,
                          const SweepGrids& grids = SweepGrids::defaults());

int best_trial_index(const std::vector<TrialResult>& trials, Metric metric);

}  // namespace uagnn
