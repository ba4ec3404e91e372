#include "uagnn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "uagnn/rng.hpp"

namespace uagnn {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

bool blank(const std::string& s) {
  return s.find_first_not_of(" \t") == std::string::npos;
}

// Shortest decimal form that parses back to the same double.
std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

int Graph::num_classes() const {
  require(labels.has_value(), "graph has no labels");
  int k = 0;
  for (int y : *labels) k = std::max(k, y + 1);
  return k;
}

bool Graph::has_edge(int u, int v) const {
  if (u > v) std::swap(u, v);
  return std::binary_search(edges.begin(), edges.end(), Edge{u, v});
}

void Graph::validate() const {
  for (const auto& [u, v] : edges) {
    require(u >= 0 && u < n && v >= 0 && v < n, "edge endpoint out of range");
    require(u < v, "edge not in canonical u < v form");
  }
  require(std::is_sorted(edges.begin(), edges.end()), "edges not sorted");
  require(std::adjacent_find(edges.begin(), edges.end()) == edges.end(),
          "duplicate edge");
  require(features.rows == n, "feature row count != n");
  if (labels) {
    require(static_cast<int>(labels->size()) == n, "label count != n");
    for (int y : *labels) require(y >= 0, "negative label");
  }
}

Graph load_graph(const std::string& path) {
  namespace fs = std::filesystem;
  const std::string edge_path = path + "/edges.tsv";
  const std::string feat_path = path + "/features.csv";
  const std::string label_path = path + "/labels.txt";
  if (!fs::exists(edge_path)) throw std::runtime_error("missing file: " + edge_path);
  if (!fs::exists(feat_path)) throw std::runtime_error("missing file: " + feat_path);

  Graph g;
  g.name = fs::path(path).filename().string();

  // Features first: the row count defines n.
  for (const std::string& line : read_lines(feat_path)) {
    if (blank(line)) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::size_t pos = 0;
      double v = std::stod(cell, &pos);
      row.push_back(v);
    }
    if (g.features.rows == 0) {
      g.features = DenseMatrix(0, static_cast<int>(row.size()));
    }
    require(static_cast<int>(row.size()) == g.features.cols,
            "non-rectangular feature rows in " + feat_path);
    g.features.data.insert(g.features.data.end(), row.begin(), row.end());
    ++g.features.rows;
  }
  g.n = g.features.rows;
  require(g.n > 0, "empty feature file " + feat_path);
  require(all_finite(g.features), "non-finite feature value in " + feat_path);

  std::set<Edge> edge_set;
  for (const std::string& line : read_lines(edge_path)) {
    if (blank(line)) continue;
    std::stringstream ss(line);
    long long u = -1, v = -1;
    ss >> u >> v;
    require(ss && u >= 0 && v >= 0, "malformed edge line: \"" + line + "\"");
    require(u < g.n && v < g.n, "edge endpoint out of range: " + line);
    if (u == v) {
      ++g.dropped_self_loops;
      continue;
    }
    if (u > v) std::swap(u, v);
    edge_set.insert({static_cast<int>(u), static_cast<int>(v)});
  }
  g.edges.assign(edge_set.begin(), edge_set.end());

  if (fs::exists(label_path)) {
    std::vector<int> labels;
    for (const std::string& line : read_lines(label_path)) {
      if (blank(line)) continue;
      labels.push_back(std::stoi(line));
    }
    require(static_cast<int>(labels.size()) == g.n,
            "label count mismatch: " + std::to_string(labels.size()) + " labels for " +
                std::to_string(g.n) + " nodes");
    for (int y : labels) require(y >= 0, "negative label in " + label_path);
    g.labels = std::move(labels);
  }

  g.validate();
  return g;
}

void save_graph(const Graph& g, const std::string& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir + "/edges.tsv");
    if (!out) throw std::runtime_error("cannot write " + dir + "/edges.tsv");
    for (const auto& [u, v] : g.edges) out << u << '\t' << v << '\n';
  }
  {
    std::ofstream out(dir + "/features.csv");
    if (!out) throw std::runtime_error("cannot write " + dir + "/features.csv");
    for (int i = 0; i < g.features.rows; ++i) {
      for (int j = 0; j < g.features.cols; ++j) {
        if (j) out << ',';
        out << format_real(g.features(i, j));
      }
      out << '\n';
    }
  }
  if (g.labels) {
    std::ofstream out(dir + "/labels.txt");
    if (!out) throw std::runtime_error("cannot write " + dir + "/labels.txt");
    for (int y : *g.labels) out << y << '\n';
  }
}

double homophily(const Graph& g) {
  require(g.labels.has_value(), "homophily needs labels");
  require(!g.edges.empty(), "homophily needs at least one edge");
  const std::vector<int>& y = *g.labels;
  long same = 0;
  for (const auto& [u, v] : g.edges)
    if (y[u] == y[v]) ++same;
  return static_cast<double>(same) / static_cast<double>(g.edges.size());
}

EdgeSplit split_edges(const Graph& g, const std::array<double, 3>& fractions,
                      std::uint64_t seed) {
  double sum = 0.0;
  for (double f : fractions) {
    require(f >= 0.0, "split fraction must be non-negative");
    sum += f;
  }
  require(std::fabs(sum - 1.0) <= 1e-9, "split fractions must sum to 1");

  std::vector<Edge> shuffled = g.edges;
  Rng rng(seed);
  rng.shuffle(shuffled);

  const auto m = static_cast<std::size_t>(shuffled.size());
  const auto n_val = static_cast<std::size_t>(std::floor(fractions[1] * m));
  const auto n_test = static_cast<std::size_t>(std::floor(fractions[2] * m));
  const std::size_t n_train = m - n_val - n_test;  // remainder lands in train

  EdgeSplit split;
  split.seed = seed;
  split.train.assign(shuffled.begin(), shuffled.begin() + n_train);
  split.validation.assign(shuffled.begin() + n_train, shuffled.begin() + n_train + n_val);
  split.test.assign(shuffled.begin() + n_train + n_val, shuffled.end());
  return split;
}

SparseMatrix to_adjacency(const Graph& g, const std::vector<Edge>& subset) {
  std::vector<std::vector<int>> adj(g.n);
  for (auto [u, v] : subset) {
    require(g.has_edge(u, v), "edge (" + std::to_string(u) + "," + std::to_string(v) +
                                  ") not in graph");
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  SparseMatrix s;
  s.rows = s.cols = g.n;
  s.row_offsets.resize(g.n + 1, 0);
  for (int i = 0; i < g.n; ++i) {
    std::sort(adj[i].begin(), adj[i].end());
    s.row_offsets[i + 1] = s.row_offsets[i] + static_cast<int>(adj[i].size());
    s.col_indices.insert(s.col_indices.end(), adj[i].begin(), adj[i].end());
  }
  s.values.assign(s.col_indices.size(), 1.0);
  return s;
}

SparseMatrix normalize_sym(const SparseMatrix& adj) {
  require(adj.rows == adj.cols, "normalize_sym: input must be square");
  const int n = adj.rows;

  // A_hat = A + I, merged so columns stay strictly increasing per row.
  SparseMatrix a_hat;
  a_hat.rows = a_hat.cols = n;
  a_hat.row_offsets.resize(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    bool placed = false;
    for (int p = adj.row_offsets[i]; p < adj.row_offsets[i + 1]; ++p) {
      const int j = adj.col_indices[p];
      if (!placed && j >= i) {
        if (j == i) {
          a_hat.col_indices.push_back(i);
          a_hat.values.push_back(adj.values[p] + 1.0);
          placed = true;
          continue;
        }
        a_hat.col_indices.push_back(i);
        a_hat.values.push_back(1.0);
        placed = true;
      }
      a_hat.col_indices.push_back(j);
      a_hat.values.push_back(adj.values[p]);
    }
    if (!placed) {
      a_hat.col_indices.push_back(i);
      a_hat.values.push_back(1.0);
    }
    a_hat.row_offsets[i + 1] = static_cast<int>(a_hat.col_indices.size());
  }

  std::vector<double> inv_sqrt_deg(n);
  for (int i = 0; i < n; ++i) {
    double d = 0.0;
    for (int p = a_hat.row_offsets[i]; p < a_hat.row_offsets[i + 1]; ++p)
      d += a_hat.values[p];
    inv_sqrt_deg[i] = 1.0 / std::sqrt(d);
  }
  for (int i = 0; i < n; ++i)
    for (int p = a_hat.row_offsets[i]; p < a_hat.row_offsets[i + 1]; ++p)
      a_hat.values[p] *= inv_sqrt_deg[i] * inv_sqrt_deg[a_hat.col_indices[p]];
  return a_hat;
}

Graph generate_sbm(int n, int k, double p_in, double p_out, int feature_dim,
                   double feature_shift, std::uint64_t seed) {
  require(n >= 1 && k >= 1, "generate_sbm: n and k must be positive");
  require(n % k == 0, "generate_sbm: n must be divisible by k");
  require(p_in >= 0.0 && p_in <= 1.0 && p_out >= 0.0 && p_out <= 1.0,
          "generate_sbm: probabilities must be in [0,1]");
  require(feature_dim >= 1, "generate_sbm: feature_dim must be positive");

  const int block_size = n / k;
  Graph g;
  g.n = n;
  g.name = "sbm";
  std::vector<int> labels(n);
  for (int u = 0; u < n; ++u) labels[u] = u / block_size;

  Rng rng(seed);
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      const double p = labels[u] == labels[v] ? p_in : p_out;
      if (rng.uniform() < p) g.edges.push_back({u, v});
    }
  }

  // Block b's mean points along axis (b mod d) with alternating sign, so
  // every mean has norm feature_shift and up to 2d blocks stay distinct.
  g.features = DenseMatrix(n, feature_dim);
  for (int u = 0; u < n; ++u) {
    const int b = labels[u];
    const int axis = b % feature_dim;
    const double sign = (b / feature_dim) % 2 == 0 ? 1.0 : -1.0;
    for (int j = 0; j < feature_dim; ++j) {
      double mean = j == axis ? sign * feature_shift : 0.0;
      g.features(u, j) = mean + rng.normal();
    }
  }
  g.labels = std::move(labels);
  g.validate();
  return g;
}

}  // namespace uagnn
