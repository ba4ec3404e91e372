#include <doctest.h>

#include <algorithm>
#include <set>

#include "test_helpers.hpp"
#include "uagnn/graph.hpp"
#include "uagnn/rng.hpp"

using namespace uagnn;
using testutil::TempDir;
using testutil::write_text;

namespace {

// Symmetric power iteration on CSR; converges to the top eigenvalue for the
// normalized operator of a connected graph (the Perron vector has full
// overlap with the all-ones start).
double top_eigenvalue(const SparseMatrix& s) {
  std::vector<double> x(s.rows, 1.0 / std::sqrt(static_cast<double>(s.rows)));
  double lambda = 0.0;
  for (int iter = 0; iter < 2000; ++iter) {
    std::vector<double> y(s.rows, 0.0);
    for (int i = 0; i < s.rows; ++i)
      for (int p = s.row_offsets[i]; p < s.row_offsets[i + 1]; ++p)
        y[i] += s.values[p] * x[s.col_indices[p]];
    double norm = 0.0;
    for (double v : y) norm += v * v;
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;
    for (double& v : y) v /= norm;
    lambda = 0.0;
    for (int i = 0; i < s.rows; ++i)
      for (int p = s.row_offsets[i]; p < s.row_offsets[i + 1]; ++p)
        lambda += y[i] * s.values[p] * y[s.col_indices[p]];
    x = std::move(y);
  }
  return lambda;
}

bool connected(const Graph& g) {
  std::vector<std::vector<int>> adj(g.n);
  for (auto [u, v] : g.edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  std::vector<bool> seen(g.n, false);
  std::vector<int> stack{0};
  seen[0] = true;
  int count = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v : adj[u])
      if (!seen[v]) {
        seen[v] = true;
        ++count;
        stack.push_back(v);
      }
  }
  return count == g.n;
}

}  // namespace

TEST_CASE("load_graph parses the three-file directory format") {
  TempDir dir("load");
  write_text(dir.str() + "/edges.tsv", "0\t1\n1\t2\n2\t3\n");
  write_text(dir.str() + "/features.csv", "1.0\n2.0\n3.0\n4.0\n");
  write_text(dir.str() + "/labels.txt", "0\n0\n1\n1\n");

  Graph g = load_graph(dir.str());
  CHECK(g.n == 4);
  CHECK(g.edges.size() == 3);
  CHECK(g.feature_dim() == 1);
  CHECK(g.labels.has_value());
  CHECK(g.num_classes() == 2);
  CHECK(g.dropped_self_loops == 0);
}

TEST_CASE("load_graph symmetrizes and deduplicates edges") {
  TempDir dir("dedup");
  write_text(dir.str() + "/edges.tsv", "0 1\n1 0\n");
  write_text(dir.str() + "/features.csv", "1.0\n2.0\n");
  Graph g = load_graph(dir.str());
  CHECK(g.edges.size() == 1);
  CHECK(g.edges[0] == Edge{0, 1});
}

TEST_CASE("load_graph drops self-loops with a count") {
  TempDir dir("loops");
  write_text(dir.str() + "/edges.tsv", "0 0\n0 1\n");
  write_text(dir.str() + "/features.csv", "1.0\n2.0\n");
  Graph g = load_graph(dir.str());
  CHECK(g.edges.size() == 1);
  CHECK(g.dropped_self_loops == 1);
}

TEST_CASE("load_graph error paths") {
  SUBCASE("missing edge file") {
    TempDir dir("missing");
    write_text(dir.str() + "/features.csv", "1.0\n");
    CHECK_THROWS(load_graph(dir.str()));
  }
  SUBCASE("non-rectangular features") {
    TempDir dir("ragged");
    write_text(dir.str() + "/edges.tsv", "0 1\n");
    write_text(dir.str() + "/features.csv", "1.0,2.0\n3.0\n");
    CHECK_THROWS(load_graph(dir.str()));
  }
  SUBCASE("endpoint out of range") {
    TempDir dir("range");
    write_text(dir.str() + "/edges.tsv", "0 7\n");
    write_text(dir.str() + "/features.csv", "1.0\n2.0\n");
    CHECK_THROWS(load_graph(dir.str()));
  }
  SUBCASE("label count mismatch") {
    TempDir dir("labels");
    write_text(dir.str() + "/edges.tsv", "0 1\n");
    write_text(dir.str() + "/features.csv", "1.0\n2.0\n");
    write_text(dir.str() + "/labels.txt", "0\n");
    CHECK_THROWS(load_graph(dir.str()));
  }
}

TEST_CASE("save_graph round-trips through load_graph") {
  Graph g = generate_sbm(20, 2, 0.5, 0.1, 3, 1.0, 11);
  TempDir dir("roundtrip");
  save_graph(g, dir.str());
  Graph back = load_graph(dir.str());
  CHECK(back.n == g.n);
  CHECK(back.edges == g.edges);
  CHECK(back.features.data == g.features.data);  // 17-digit format is lossless
  CHECK(*back.labels == *g.labels);
}

TEST_CASE("homophily on hand graphs") {
  Graph g = testutil::path_graph(4, 1, 0);

  SUBCASE("all labels equal gives 1") {
    g.labels = std::vector<int>{0, 0, 0, 0};
    CHECK(homophily(g) == 1.0);
  }
  SUBCASE("path 0-1-2-3 with labels 0,0,1,1 gives 2/3") {
    g.labels = std::vector<int>{0, 0, 1, 1};
    CHECK(homophily(g) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  }
  SUBCASE("labels absent throws") { CHECK_THROWS(homophily(g)); }
  SUBCASE("empty edge set throws") {
    Graph empty;
    empty.n = 2;
    empty.features = DenseMatrix(2, 1);
    empty.labels = std::vector<int>{0, 1};
    CHECK_THROWS(homophily(empty));
  }
}

TEST_CASE("homophily stays in [0,1] on random labeled graphs") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Graph g = testutil::random_graph(12, 1, 0.3, seed, 3);
    if (g.edges.empty()) continue;
    const double h = homophily(g);
    CHECK(h >= 0.0);
    CHECK(h <= 1.0);
  }
}

TEST_CASE("split_edges slices floor(f*E) with remainder to train") {
  Graph g = testutil::random_graph(30, 1, 0.25, 3);
  // Trim to exactly 100 edges for the headline protocol check.
  REQUIRE(g.edges.size() >= 100);
  g.edges.resize(100);

  EdgeSplit split = split_edges(g, {0.64, 0.16, 0.20}, 42);
  CHECK(split.train.size() == 64);
  CHECK(split.validation.size() == 16);
  CHECK(split.test.size() == 20);
}

TEST_CASE("split_edges with fractions (1,0,0) puts everything in train") {
  Graph g = testutil::path_graph(10, 1, 0);
  EdgeSplit split = split_edges(g, {1.0, 0.0, 0.0}, 5);
  CHECK(split.train.size() == g.edges.size());
  CHECK(split.validation.empty());
  CHECK(split.test.empty());
}

TEST_CASE("split_edges is deterministic per seed") {
  Graph g = testutil::random_graph(20, 1, 0.3, 9);
  EdgeSplit a = split_edges(g, {0.64, 0.16, 0.20}, 7);
  EdgeSplit b = split_edges(g, {0.64, 0.16, 0.20}, 7);
  CHECK(a.train == b.train);
  CHECK(a.validation == b.validation);
  CHECK(a.test == b.test);
}

TEST_CASE("split_edges rejects invalid fractions") {
  Graph g = testutil::path_graph(5, 1, 0);
  CHECK_THROWS(split_edges(g, {0.5, 0.4, 0.2}, 0));
  CHECK_THROWS(split_edges(g, {-0.1, 0.6, 0.5}, 0));
}

TEST_CASE("split_edges partitions the edge set across random instances") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Graph g = testutil::random_graph(15, 1, 0.3, seed);
    if (g.edges.empty()) continue;
    EdgeSplit s = split_edges(g, {0.64, 0.16, 0.20}, seed * 31 + 1);

    std::set<Edge> all(s.train.begin(), s.train.end());
    const std::size_t train_count = all.size();
    all.insert(s.validation.begin(), s.validation.end());
    const std::size_t after_val = all.size();
    all.insert(s.test.begin(), s.test.end());

    CHECK(train_count == s.train.size());  // no duplicates within a set
    CHECK(after_val == s.train.size() + s.validation.size());  // pairwise disjoint
    CHECK(all.size() == g.edges.size());
    CHECK(std::set<Edge>(g.edges.begin(), g.edges.end()) == all);
  }
}

TEST_CASE("to_adjacency materializes both directions") {
  Graph g = testutil::path_graph(3, 1, 0);
  SparseMatrix a = to_adjacency(g, g.edges);
  a.validate();
  CHECK(a.rows == 3);
  CHECK(a.at(1, 0) == 1.0);
  CHECK(a.at(1, 2) == 1.0);
  CHECK(a.at(1, 1) == 0.0);
  CHECK(a.at(0, 2) == 0.0);

  SUBCASE("empty subset gives all-zero matrix") {
    SparseMatrix z = to_adjacency(g, {});
    CHECK(z.nnz() == 0);
  }
  SUBCASE("edges outside the graph are rejected") {
    CHECK_THROWS(to_adjacency(g, {{0, 2}}));
  }
}

TEST_CASE("to_adjacency equals its transpose on random graphs") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Graph g = testutil::random_graph(5 + static_cast<int>(seed) % 26, 1, 0.3, seed);
    SparseMatrix a = to_adjacency(g, g.edges);
    for (int i = 0; i < a.rows; ++i)
      for (int p = a.row_offsets[i]; p < a.row_offsets[i + 1]; ++p)
        CHECK(a.at(a.col_indices[p], i) == a.values[p]);
  }
}

TEST_CASE("to_adjacency round-trips the edge set") {
  Graph g = testutil::random_graph(25, 1, 0.2, 77);
  SparseMatrix a = to_adjacency(g, g.edges);
  std::vector<Edge> recovered;
  for (int i = 0; i < a.rows; ++i)
    for (int p = a.row_offsets[i]; p < a.row_offsets[i + 1]; ++p)
      if (i < a.col_indices[p]) recovered.push_back({i, a.col_indices[p]});
  std::sort(recovered.begin(), recovered.end());
  CHECK(recovered == g.edges);
}

TEST_CASE("normalize_sym hand cases") {
  SUBCASE("single isolated node becomes [1]") {
    Graph g;
    g.n = 1;
    g.features = DenseMatrix(1, 1);
    SparseMatrix norm = normalize_sym(to_adjacency(g, {}));
    CHECK(norm.nnz() == 1);
    CHECK(norm.at(0, 0) == 1.0);
  }
  SUBCASE("single edge gives all entries 1/2") {
    Graph g = testutil::path_graph(2, 1, 0);
    SparseMatrix norm = normalize_sym(to_adjacency(g, g.edges));
    CHECK(norm.at(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(norm.at(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(norm.at(1, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(norm.at(1, 1) == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("diagonal entries are 1/deg_hat") {
    Graph g = testutil::path_graph(3, 1, 0);
    SparseMatrix norm = normalize_sym(to_adjacency(g, g.edges));
    CHECK(norm.at(0, 0) == doctest::Approx(1.0 / 2.0));  // degree 1 + self-loop
    CHECK(norm.at(1, 1) == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("non-square input is rejected") {
    SparseMatrix bad;
    bad.rows = 2;
    bad.cols = 3;
    bad.row_offsets = {0, 0, 0};
    CHECK_THROWS(normalize_sym(bad));
  }
}

TEST_CASE("normalize_sym output is symmetric, non-negative, top eigenvalue 1") {
  int checked = 0;
  for (std::uint64_t seed = 0; checked < 8 && seed < 60; ++seed) {
    Graph g = testutil::random_graph(6 + static_cast<int>(seed % 15), 1, 0.35, seed);
    if (!connected(g)) continue;
    ++checked;
    SparseMatrix norm = normalize_sym(to_adjacency(g, g.edges));
    norm.validate();
    for (int i = 0; i < norm.rows; ++i)
      for (int p = norm.row_offsets[i]; p < norm.row_offsets[i + 1]; ++p) {
        CHECK(norm.values[p] >= 0.0);
        CHECK(std::fabs(norm.at(norm.col_indices[p], i) - norm.values[p]) <= 1e-12);
      }
    CHECK(top_eigenvalue(norm) == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK(checked == 8);
}

TEST_CASE("generate_sbm extreme probabilities") {
  SUBCASE("p_in=1, p_out=0 gives two cliques with homophily 1") {
    Graph g = generate_sbm(20, 2, 1.0, 0.0, 2, 1.0, 3);
    CHECK(g.edges.size() == 2 * (10 * 9 / 2));
    CHECK(homophily(g) == 1.0);
  }
  SUBCASE("p_in=0, p_out=1 gives complete bipartite with homophily 0") {
    Graph g = generate_sbm(20, 2, 0.0, 1.0, 2, 1.0, 3);
    CHECK(g.edges.size() == 100);
    CHECK(homophily(g) == 0.0);
  }
}

TEST_CASE("generate_sbm heterophilic configuration lands below 0.25") {
  Graph g = generate_sbm(200, 2, 0.02, 0.10, 4, 1.0, 7);
  REQUIRE(!g.edges.empty());
  CHECK(homophily(g) < 0.25);
}

TEST_CASE("generate_sbm rejects bad arguments") {
  CHECK_THROWS(generate_sbm(201, 2, 0.1, 0.1, 2, 1.0, 0));
  CHECK_THROWS(generate_sbm(10, 2, 1.5, 0.1, 2, 1.0, 0));
}

TEST_CASE("generate_sbm is deterministic and label-permutation invariant") {
  Graph a = generate_sbm(30, 3, 0.4, 0.1, 3, 1.0, 5);
  Graph b = generate_sbm(30, 3, 0.4, 0.1, 3, 1.0, 5);
  CHECK(a.edges == b.edges);
  CHECK(a.features.data == b.features.data);

  // Homophily only compares labels for equality, so any relabeling of the
  // blocks leaves it unchanged.
  Graph c = a;
  for (int& y : *c.labels) y = (y + 1) % 3;
  CHECK(homophily(c) == homophily(a));
}
