#include "uagnn/stability.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

#include "uagnn/train.hpp"

namespace uagnn {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

std::string regime_name(Regime r) {
  switch (r) {
    case Regime::Unstable: return "UNSTABLE";
    case Regime::Dissipative: return "DISSIPATIVE";
    case Regime::NonDissipative: return "NON_DISSIPATIVE";
  }
  return "?";
}

std::vector<double> symmetric_eigenvalues(const DenseMatrix& s) {
  require(s.rows == s.cols, "symmetric_eigenvalues: matrix must be square");
  const int n = s.rows;
  DenseMatrix a = s;

  // Cyclic Jacobi. Off-diagonal mass shrinks quadratically; 50 sweeps is far
  // beyond what h <= 128 needs.
  for (int sweep = 0; sweep < 50; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off <= 1e-30 * std::max(1.0, frobenius_norm(a))) break;

    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::fabs(apq) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (int i = 0; i < n; ++i) {
          const double aip = a(i, p);
          const double aiq = a(i, q);
          a(i, p) = c * aip - sn * aiq;
          a(i, q) = sn * aip + c * aiq;
        }
        for (int i = 0; i < n; ++i) {
          const double api = a(p, i);
          const double aqi = a(q, i);
          a(p, i) = c * api - sn * aqi;
          a(q, i) = sn * api + c * aqi;
        }
      }
    }
  }

  std::vector<double> eig(n);
  for (int i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

SpectrumReport effective_spectrum(const DenseMatrix& w, double gamma) {
  require(w.rows == w.cols, "effective_spectrum: W must be square");
  const int h = w.rows;
  const DenseMatrix m = sub(w, transpose(w));

  // Skew defect: exactly zero in floating point, kept as a numeric witness.
  const DenseMatrix defect = add(m, transpose(m));

  // Singular values via the symmetric augmented matrix [[0, M], [M^T, 0]],
  // whose eigenvalues are +/- sigma_j. This keeps absolute accuracy at
  // eps * sigma_max; squaring through M^T M would lose half the digits and
  // miss the 1e-9 pairing tolerance for the odd-dimension zero.
  DenseMatrix augmented(2 * h, 2 * h);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < h; ++j) {
      augmented(i, h + j) = m(i, j);
      augmented(h + i, j) = m(j, i);
    }
  }
  const std::vector<double> eig = symmetric_eigenvalues(augmented);  // ascending

  SpectrumReport report;
  report.gamma = gamma;
  report.real_part = -gamma;
  report.max_real_deviation = 0.5 * max_abs(defect);
  // |eigenvalues| sorted descending hold each sigma twice; keep every other.
  std::vector<double> magnitudes;
  magnitudes.reserve(eig.size());
  for (double v : eig) magnitudes.push_back(std::fabs(v));
  std::sort(magnitudes.rbegin(), magnitudes.rend());
  for (int i = 0; i < h; ++i) report.singular_values.push_back(magnitudes[2 * i]);
  return report;
}

Regime classify_regime(const SpectrumReport& report, double tol) {
  const double max_real = report.real_part + report.max_real_deviation;
  if (max_real > tol) return Regime::Unstable;
  if (max_real < -tol) return Regime::Dissipative;
  return Regime::NonDissipative;
}

std::vector<int> bfs_distances(const Graph& g, int source) {
  require(source >= 0 && source < g.n, "bfs: source out of range");
  std::vector<std::vector<int>> adj(g.n);
  for (const auto& [u, v] : g.edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  std::vector<int> dist(g.n, -1);
  std::queue<int> queue;
  dist[source] = 0;
  queue.push(source);
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop();
    for (int v : adj[u]) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push(v);
      }
    }
  }
  return dist;
}

DenseMatrix sensitivity_jacobian(const ModelParams& params, const SparseMatrix& op,
                                 const DenseMatrix& x0, const HyperParams& hp,
                                 int source, JacobianMethod method) {
  const int n = x0.rows;
  const int h = x0.cols;
  require(source >= 0 && source < n, "sensitivity: source out of range");
  DenseMatrix jac(n * h, h);

  if (method == JacobianMethod::Autodiff) {
    Tape tape;
    ModelVars vars = make_leaves(tape, params);
    Variable state = tape.input(x0, true);
    EncoderOutput enc = encode_from_state(vars, op, state, hp, tape);
    // One reverse sweep per output scalar; each yields the full gradient
    // w.r.t. x0, of which we keep the source row.
    DenseMatrix seed(n, h);
    for (int v = 0; v < n; ++v) {
      for (int c = 0; c < h; ++c) {
        seed(v, c) = 1.0;
        tape.backward_seeded(enc.xl, seed);
        const DenseMatrix& grad = tape.grad(state);
        for (int j = 0; j < h; ++j) jac(v * h + c, j) = grad(source, j);
        seed(v, c) = 0.0;
      }
    }
    return jac;
  }

  // Central finite differences on the source state; one probe pair per input
  // coordinate gives a full n x h slab of the Jacobian.
  const double step = 1e-5;
  DenseMatrix probe = x0;
  for (int j = 0; j < h; ++j) {
    const double saved = probe(source, j);
    probe(source, j) = saved + step;
    DenseMatrix plus;
    {
      Tape tape;
      ModelVars vars = make_leaves(tape, params);
      plus = encode_from_state(vars, op, tape.input(probe, false), hp, tape).xl.value();
    }
    probe(source, j) = saved - step;
    DenseMatrix minus;
    {
      Tape tape;
      ModelVars vars = make_leaves(tape, params);
      minus = encode_from_state(vars, op, tape.input(probe, false), hp, tape).xl.value();
    }
    probe(source, j) = saved;
    for (int v = 0; v < n; ++v)
      for (int c = 0; c < h; ++c)
        jac(v * h + c, j) = (plus(v, c) - minus(v, c)) / (2.0 * step);
  }
  return jac;
}

SensitivityProfile sensitivity_profile(const ModelParams& params, const Graph& g,
                                       const HyperParams& hp, int source,
                                       JacobianMethod method,
                                       const std::string& model_tag) {
  require(source >= 0 && source < g.n, "sensitivity_profile: source out of range");
  const SparseMatrix op = build_operator(g, g.edges, hp.aggregation);
  const DenseMatrix x0 = add_row_bias(matmul(g.features, params.w_in), params.b_in);
  const DenseMatrix jac = sensitivity_jacobian(params, op, x0, hp, source, method);
  const int h = x0.cols;

  const std::vector<int> dist = bfs_distances(g, source);
  const int max_dist = *std::max_element(dist.begin(), dist.end());

  SensitivityProfile profile;
  profile.source = source;
  profile.model_tag = model_tag;
  for (int d = 0; d <= max_dist; ++d) {
    double sum = 0.0;
    int count = 0;
    for (int v = 0; v < g.n; ++v) {
      if (dist[v] != d) continue;
      double block = 0.0;
      for (int c = 0; c < h; ++c)
        for (int j = 0; j < h; ++j) block += jac(v * h + c, j) * jac(v * h + c, j);
      sum += std::sqrt(block);
      ++count;
    }
    if (count == 0) continue;  // no node at this distance
    profile.distances.push_back(d);
    profile.influence.push_back(sum / count);
    profile.nodes_at_distance.push_back(count);
  }
  return profile;
}

std::vector<double> linear_probe_norms(const DenseMatrix& w, const DenseMatrix& x0,
                                       double eps, int layers) {
  const DenseMatrix skew_t = transpose(sub(w, transpose(w)));
  std::vector<double> norms;
  norms.push_back(frobenius_norm(x0));
  DenseMatrix state = x0;
  for (int l = 0; l < layers; ++l) {
    state = add(state, scale(matmul(state, skew_t), eps));
    norms.push_back(frobenius_norm(state));
  }
  return norms;
}

}  // namespace uagnn
