#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "uagnn/dense.hpp"
#include "uagnn/graph.hpp"
#include "uagnn/rng.hpp"

namespace testutil {

// Fresh scratch directory under the system temp root, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 gen(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() /
            ("uagnn_" + tag + "_" + std::to_string(gen()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string str() const { return path_.string(); }
  std::filesystem::path path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

inline uagnn::DenseMatrix random_matrix(int rows, int cols, uagnn::Rng& rng,
                                        double scale = 1.0) {
  uagnn::DenseMatrix m(rows, cols);
  for (double& x : m.data) x = rng.uniform(-scale, scale);
  return m;
}

// Path graph 0-1-2-...-(n-1) with random features.
inline uagnn::Graph path_graph(int n, int feature_dim, std::uint64_t seed) {
  uagnn::Graph g;
  g.n = n;
  g.name = "path";
  for (int i = 0; i + 1 < n; ++i) g.edges.push_back({i, i + 1});
  uagnn::Rng rng(seed);
  g.features = random_matrix(n, feature_dim, rng);
  return g;
}

inline uagnn::Graph random_graph(int n, int feature_dim, double p, std::uint64_t seed,
                                 int num_classes = 0) {
  uagnn::Graph g;
  g.n = n;
  g.name = "random";
  uagnn::Rng rng(seed);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (rng.uniform() < p) g.edges.push_back({u, v});
  g.features = random_matrix(n, feature_dim, rng);
  if (num_classes > 0) {
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) labels[i] = static_cast<int>(rng.uniform_int(num_classes));
    g.labels = labels;
  }
  return g;
}

}  // namespace testutil
