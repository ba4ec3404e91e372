#include "uagnn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace uagnn {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

int id_range(const std::vector<int>& ids) {
  int k = 0;
  for (int v : ids) {
    require(v >= 0, "cluster/label ids must be non-negative");
    k = std::max(k, v + 1);
  }
  return k;
}

}  // namespace

ContingencyTable ContingencyTable::build(const std::vector<int>& pred,
                                         const std::vector<int>& truth) {
  require(pred.size() == truth.size(), "contingency: length mismatch");
  require(!pred.empty(), "contingency: empty input");
  ContingencyTable t;
  t.k_pred = id_range(pred);
  t.k_true = id_range(truth);
  t.total = static_cast<long>(pred.size());
  t.counts.assign(static_cast<std::size_t>(t.k_pred) * t.k_true, 0);
  t.pred_marginals.assign(t.k_pred, 0);
  t.true_marginals.assign(t.k_true, 0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    ++t.counts[static_cast<std::size_t>(pred[i]) * t.k_true + truth[i]];
    ++t.pred_marginals[pred[i]];
    ++t.true_marginals[truth[i]];
  }
  return t;
}

std::vector<int> hungarian(const DenseMatrix& cost) {
  require(all_finite(cost), "hungarian: non-finite cost entry");
  const int n_rows = cost.rows;
  const int n_cols = cost.cols;
  const int n = std::max(n_rows, n_cols);  // pad to square with zero cost

  auto cost_at = [&](int i, int j) -> double {
    return (i < n_rows && j < n_cols) ? cost(i, j) : 0.0;
  };

  // Potentials method, 1-indexed internals; p[j] = row matched to column j.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost_at(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> assignment(n_rows, -1);
  for (int j = 1; j <= n; ++j) {
    const int row = p[j] - 1;
    if (row < n_rows && j - 1 < n_cols) assignment[row] = j - 1;
  }
  return assignment;
}

double macro_f1(const std::vector<int>& pred, const std::vector<int>& truth) {
  const ContingencyTable t = ContingencyTable::build(pred, truth);

  // Maximum-overlap one-to-one matching: minimize negated counts. Overlap
  // ties are broken toward the pairing with higher per-class F1 (which is
  // exactly 2 n_pc / (m_p + m_c)); eta is small enough that the sum of
  // tie-break terms can never outweigh one unit of overlap, and the result
  // becomes invariant under relabeling of the cluster ids.
  const double eta = 0.5 / static_cast<double>(std::max(t.k_pred, t.k_true) + 1);
  DenseMatrix cost(t.k_pred, t.k_true);
  for (int p = 0; p < t.k_pred; ++p) {
    for (int c = 0; c < t.k_true; ++c) {
      const long overlap = t.at(p, c);
      const double pair_f1 =
          overlap == 0 ? 0.0
                       : 2.0 * static_cast<double>(overlap) /
                             static_cast<double>(t.pred_marginals[p] + t.true_marginals[c]);
      cost(p, c) = -(static_cast<double>(overlap) + eta * pair_f1);
    }
  }
  const std::vector<int> cluster_to_class = hungarian(cost);

  double f1_sum = 0.0;
  for (int c = 0; c < t.k_true; ++c) {
    long tp = 0, fp = 0;
    for (int p = 0; p < t.k_pred; ++p) {
      if (cluster_to_class[p] != c) continue;
      tp += t.at(p, c);
      fp += t.pred_marginals[p] - t.at(p, c);
    }
    const long fn = t.true_marginals[c] - tp;
    const long denom = 2 * tp + fp + fn;
    f1_sum += denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
  }
  return f1_sum / static_cast<double>(t.k_true);
}

double nmi(const std::vector<int>& pred, const std::vector<int>& truth) {
  const ContingencyTable t = ContingencyTable::build(pred, truth);
  const double n = static_cast<double>(t.total);

  // Identical partitions (up to relabeling) show up as a bijective table:
  // exactly one nonzero per occupied row and column. Score them 1 exactly
  // instead of through the formula, which lands within a few ulps of 1.
  bool bijective = true;
  std::vector<int> col_nonzeros(t.k_true, 0);
  for (int p = 0; p < t.k_pred && bijective; ++p) {
    int row_nonzeros = 0;
    for (int c = 0; c < t.k_true; ++c) {
      if (t.at(p, c) > 0) {
        ++row_nonzeros;
        ++col_nonzeros[c];
      }
    }
    if (t.pred_marginals[p] > 0 && row_nonzeros != 1) bijective = false;
  }
  for (int c = 0; c < t.k_true && bijective; ++c)
    if (t.true_marginals[c] > 0 && col_nonzeros[c] != 1) bijective = false;
  if (bijective) return 1.0;

  double h_pred = 0.0, h_true = 0.0, mi = 0.0;
  for (long c : t.pred_marginals)
    if (c > 0) h_pred -= (c / n) * std::log(c / n);
  for (long c : t.true_marginals)
    if (c > 0) h_true -= (c / n) * std::log(c / n);
  for (int p = 0; p < t.k_pred; ++p) {
    for (int c = 0; c < t.k_true; ++c) {
      const long joint = t.at(p, c);
      if (joint == 0) continue;
      mi += (joint / n) *
            std::log(n * joint /
                     (static_cast<double>(t.pred_marginals[p]) * t.true_marginals[c]));
    }
  }

  const double mean_entropy = 0.5 * (h_pred + h_true);
  if (mean_entropy == 0.0) return 0.0;  // one side single-cluster, partitions differ
  return std::clamp(mi / mean_entropy, 0.0, 1.0);
}

double conductance(const std::vector<int>& pred, const Graph& g) {
  require(static_cast<int>(pred.size()) == g.n, "conductance: length mismatch");
  require(!g.edges.empty(), "conductance: empty edge set");
  const int k = id_range(pred);
  const long m = static_cast<long>(g.edges.size());

  std::vector<long> degree(g.n, 0);
  for (const auto& [u, v] : g.edges) {
    ++degree[u];
    ++degree[v];
  }
  std::vector<long> vol(k, 0), cut(k, 0);
  std::vector<bool> present(k, false);
  for (int u = 0; u < g.n; ++u) {
    vol[pred[u]] += degree[u];
    present[pred[u]] = true;
  }
  for (const auto& [u, v] : g.edges) {
    if (pred[u] != pred[v]) {
      ++cut[pred[u]];
      ++cut[pred[v]];
    }
  }

  double sum = 0.0;
  int counted = 0;
  for (int c = 0; c < k; ++c) {
    if (!present[c]) continue;
    const long denom = std::min(vol[c], 2 * m - vol[c]);
    if (denom == 0) continue;
    sum += static_cast<double>(cut[c]) / static_cast<double>(denom);
    ++counted;
  }
  return counted == 0 ? 0.0 : sum / counted;
}

double macro_f1(const Partition& pred, const std::vector<int>& truth) {
  return macro_f1(pred.assignments, truth);
}

double nmi(const Partition& pred, const std::vector<int>& truth) {
  return nmi(pred.assignments, truth);
}

double conductance(const Partition& pred, const Graph& g) {
  return conductance(pred.assignments, g);
}

std::string metric_name(Metric m) {
  switch (m) {
    case Metric::F1: return "f1";
    case Metric::Nmi: return "nmi";
    case Metric::Conductance: return "conductance";
  }
  return "?";
}

Metric metric_from_name(const std::string& name) {
  if (name == "f1") return Metric::F1;
  if (name == "nmi") return Metric::Nmi;
  if (name == "conductance") return Metric::Conductance;
  throw std::invalid_argument("unknown metric: " + name);
}

bool metric_higher_is_better(Metric m) { return m != Metric::Conductance; }

double evaluate_metric(Metric m, const Partition& pred, const std::vector<int>& truth,
                       const Graph& g) {
  switch (m) {
    case Metric::F1: return macro_f1(pred, truth);
    case Metric::Nmi: return nmi(pred, truth);
    case Metric::Conductance: return conductance(pred, g);
  }
  throw std::logic_error("unreachable");
}

std::string metric_report_json(Metric m, double value, std::uint64_t seed,
                               const std::string& split, int k) {
  nlohmann::json j;
  j["metric"] = metric_name(m);
  j["value"] = value;
  j["seed"] = seed;
  j["split"] = split;
  j["k"] = k;
  return j.dump();
}

}  // namespace uagnn
