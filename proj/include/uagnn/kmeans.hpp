#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uagnn/dense.hpp"

namespace uagnn {

// Restart budget used by every pipeline k-means invocation.
inline constexpr int kKmeansRestarts = 20;

// Hard cluster assignment for n points.
struct Partition {
  std::vector<int> assignments;  // ids in [0, k)
  int k = 0;
  double inertia = 0.0;          // sum of squared distances to assigned centroids
};

struct LloydResult {
  std::vector<int> assignments;
  DenseMatrix centroids;  // recomputed means (empty clusters re-seeded)
  double inertia;         // w.r.t. the centroids used for assignment
};

/// One Lloyd iteration: nearest-centroid assignment (ties to the lowest id),
/// inertia, then mean update. An empty cluster is re-seeded with the point
/// currently farthest from its assigned centroid.
LloydResult lloyd_step(const DenseMatrix& x, const DenseMatrix& centroids);

/// k-means++ seeding: first centroid uniform, then squared-distance-weighted.
DenseMatrix kmeanspp_init(const DenseMatrix& x, int k, std::uint64_t sub_seed);

/// Multi-restart k-means. Each restart derives its own sub-seed from `seed`;
/// the restart with minimum final inertia wins.
Partition kmeans(const DenseMatrix& x, int k, int n_init = 20, int max_iter = 300,
                 double tol = 1e-6, std::uint64_t seed = 0);

/// Writes `path` with one cluster id per line (1-indexed, ids in [1, k])
/// and `path`.json with {k, inertia, seed}. Ids are 0-indexed everywhere in
/// memory; the shift to 1..k is confined to this presentation layer.
void save_partition(const Partition& partition, const std::string& path,
                    std::uint64_t seed);

}  // namespace uagnn
