#include "uagnn/kmeans.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "uagnn/rng.hpp"

namespace uagnn {

namespace {

double sq_dist(const DenseMatrix& a, int ai, const DenseMatrix& b, int bi) {
  const double* pa = &a.data[static_cast<std::size_t>(ai) * a.cols];
  const double* pb = &b.data[static_cast<std::size_t>(bi) * b.cols];
  double s = 0.0;
  for (int j = 0; j < a.cols; ++j) {
    const double d = pa[j] - pb[j];
    s += d * d;
  }
  return s;
}

}  // namespace

LloydResult lloyd_step(const DenseMatrix& x, const DenseMatrix& centroids) {
  if (centroids.rows < 1) throw std::invalid_argument("lloyd_step: no centroids");
  const int n = x.rows;
  const int k = centroids.rows;

  LloydResult res;
  res.assignments.resize(n);
  res.inertia = 0.0;
  std::vector<double> dist_to_own(n);
  for (int i = 0; i < n; ++i) {
    int best = 0;
    double best_d = sq_dist(x, i, centroids, 0);
    for (int c = 1; c < k; ++c) {
      const double d = sq_dist(x, i, centroids, c);
      if (d < best_d) {  // strict: ties stay with the lowest id
        best_d = d;
        best = c;
      }
    }
    res.assignments[i] = best;
    dist_to_own[i] = best_d;
    res.inertia += best_d;
  }

  res.centroids = DenseMatrix(k, x.cols);
  std::vector<int> counts(k, 0);
  for (int i = 0; i < n; ++i) {
    const int c = res.assignments[i];
    ++counts[c];
    for (int j = 0; j < x.cols; ++j) res.centroids(c, j) += x(i, j);
  }
  std::vector<bool> reseeded(n, false);
  for (int c = 0; c < k; ++c) {
    if (counts[c] > 0) {
      for (int j = 0; j < x.cols; ++j) res.centroids(c, j) /= counts[c];
      continue;
    }
    // Re-seed from the point farthest from its current centroid.
    int far = -1;
    double far_d = -1.0;
    for (int i = 0; i < n; ++i) {
      if (reseeded[i]) continue;
      if (dist_to_own[i] > far_d) {
        far_d = dist_to_own[i];
        far = i;
      }
    }
    if (far >= 0) {
      reseeded[far] = true;
      for (int j = 0; j < x.cols; ++j) res.centroids(c, j) = x(far, j);
    }
  }
  return res;
}

DenseMatrix kmeanspp_init(const DenseMatrix& x, int k, std::uint64_t sub_seed) {
  const int n = x.rows;
  if (k > n) throw std::invalid_argument("kmeanspp_init: k > n");
  Rng rng(sub_seed);

  DenseMatrix centroids(k, x.cols);
  std::vector<int> chosen;
  chosen.push_back(static_cast<int>(rng.uniform_int(n)));
  std::vector<double> nearest(n);
  for (int i = 0; i < n; ++i) nearest[i] = sq_dist(x, i, x, chosen[0]);

  while (static_cast<int>(chosen.size()) < k) {
    double total = 0.0;
    for (double d : nearest) total += d;
    int pick;
    if (total <= 0.0) {
      // All points coincide with a chosen centroid; any selection is valid.
      pick = static_cast<int>(rng.uniform_int(n));
    } else {
      const double r = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (int i = 0; i < n; ++i) {
        acc += nearest[i];
        if (r < acc) {
          pick = i;
          break;
        }
      }
    }
    chosen.push_back(pick);
    for (int i = 0; i < n; ++i)
      nearest[i] = std::min(nearest[i], sq_dist(x, i, x, pick));
  }

  for (int c = 0; c < k; ++c)
    for (int j = 0; j < x.cols; ++j) centroids(c, j) = x(chosen[c], j);
  return centroids;
}

Partition kmeans(const DenseMatrix& x, int k, int n_init, int max_iter, double tol,
                 std::uint64_t seed) {
  if (k <= 0) throw std::invalid_argument("kmeans: k must be positive");
  if (k > x.rows) throw std::invalid_argument("kmeans: k > n");
  if (n_init < 1) throw std::invalid_argument("kmeans: n_init must be >= 1");

  Partition best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < n_init; ++restart) {
    DenseMatrix centroids = kmeanspp_init(x, k, mix_seed(seed, restart));
    LloydResult step = lloyd_step(x, centroids);
    for (int iter = 1; iter < max_iter; ++iter) {
      LloydResult next = lloyd_step(x, step.centroids);
      const double improvement = step.inertia - next.inertia;
      step = std::move(next);
      if (improvement < tol) break;
    }
    if (step.inertia < best.inertia) {
      best.assignments = step.assignments;
      best.inertia = step.inertia;
      best.k = k;
    }
  }
  return best;
}

void save_partition(const Partition& partition, const std::string& path,
                    std::uint64_t seed) {
  {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (int id : partition.assignments) out << id + 1 << '\n';
  }
  nlohmann::json summary;
  summary["k"] = partition.k;
  summary["inertia"] = partition.inertia;
  summary["seed"] = seed;
  std::ofstream out(path + ".json");
  if (!out) throw std::runtime_error("cannot write " + path + ".json");
  out << summary.dump(2) << '\n';
}

}  // namespace uagnn
