#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "uagnn/dense.hpp"
#include "uagnn/sparse.hpp"

namespace uagnn {

using Edge = std::pair<int, int>;  // canonical form u < v

// Undirected attributed graph. Edges are stored once as unordered pairs in
// canonical (u < v) sorted order; adjacency materialization duplicates both
// directions. Immutable after construction by convention.
struct Graph {
  int n = 0;
  std::vector<Edge> edges;
  DenseMatrix features;                     // n x d
  std::optional<std::vector<int>> labels;   // class ids in [0, k)
  std::string name;
  int dropped_self_loops = 0;

  int feature_dim() const { return features.cols; }
  int num_classes() const;       // labels required
  bool has_edge(int u, int v) const;
  void validate() const;         // throws std::invalid_argument
};

struct EdgeSplit {
  std::vector<Edge> train;
  std::vector<Edge> validation;
  std::vector<Edge> test;
  std::uint64_t seed = 0;
};

/// Reads a dataset directory: edges.tsv, features.csv, labels.txt (optional).
/// Edges are symmetrized and deduplicated; self-loops are dropped and counted.
Graph load_graph(const std::string& path);

/// Writes the same three-file format load_graph reads. Deterministic output:
/// identical graphs serialize byte-identically.
void save_graph(const Graph& g, const std::string& dir);

/// Fraction of edges joining same-label endpoints, over unordered pairs.
double homophily(const Graph& g);

/// Deterministic shuffle-and-slice split. Validation/test sizes are
/// floor(f * |E|); the remainder goes to train.
EdgeSplit split_edges(const Graph& g, const std::array<double, 3>& fractions,
                      std::uint64_t seed);

/// Symmetric 0/1 adjacency over an edge subset, both directions, zero diagonal.
SparseMatrix to_adjacency(const Graph& g, const std::vector<Edge>& subset);

/// D^{-1/2} (A + I) D^{-1/2} with D the degree matrix of A + I.
SparseMatrix normalize_sym(const SparseMatrix& adj);

/// Planted-partition generator: k equal blocks, p_in within, p_out across.
/// Features are unit-variance spherical noise around a block mean of norm
/// feature_shift; labels are block ids.
Graph generate_sbm(int n, int k, double p_in, double p_out, int feature_dim,
                   double feature_shift, std::uint64_t seed);

}  // namespace uagnn
