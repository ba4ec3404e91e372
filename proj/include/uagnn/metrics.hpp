#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uagnn/dense.hpp"
#include "uagnn/graph.hpp"
#include "uagnn/kmeans.hpp"

namespace uagnn {

// Joint label-count table between a predicted and a true partition.
struct ContingencyTable {
  int k_pred = 0;
  int k_true = 0;
  std::vector<long> counts;  // k_pred x k_true, row-major
  std::vector<long> pred_marginals;
  std::vector<long> true_marginals;
  long total = 0;

  long at(int p, int t) const { return counts[static_cast<std::size_t>(p) * k_true + t]; }
  static ContingencyTable build(const std::vector<int>& pred, const std::vector<int>& truth);
};

/// Minimum-cost one-to-one assignment of rows to columns. Rectangular inputs
/// are padded internally; rows matched to padding columns report -1.
std::vector<int> hungarian(const DenseMatrix& cost);

/// Macro-averaged F1 after maximum-overlap one-to-one alignment of predicted
/// clusters to true classes.
double macro_f1(const std::vector<int>& pred, const std::vector<int>& truth);

/// Mutual information normalized by the arithmetic mean of the entropies
/// (nats). Identical partitions score 1 even in the single-cluster case.
double nmi(const std::vector<int>& pred, const std::vector<int>& truth);

/// Mean over non-degenerate clusters S of cut(S) / min(vol(S), 2m - vol(S)).
/// Lower is better; 0 when every cluster is degenerate.
double conductance(const std::vector<int>& pred, const Graph& g);

double macro_f1(const Partition& pred, const std::vector<int>& truth);
double nmi(const Partition& pred, const std::vector<int>& truth);
double conductance(const Partition& pred, const Graph& g);

enum class Metric { F1, Nmi, Conductance };
std::string metric_name(Metric m);
Metric metric_from_name(const std::string& name);
bool metric_higher_is_better(Metric m);
double evaluate_metric(Metric m, const Partition& pred, const std::vector<int>& truth,
                       const Graph& g);

/// One-line JSON report: {metric, value, seed, split, k}.
std::string metric_report_json(Metric m, double value, std::uint64_t seed,
                               const std::string& split, int k);

}  // namespace uagnn
