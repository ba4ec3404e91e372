#pragma once

#include <string>
#include <vector>

#include "uagnn/dense.hpp"
#include "uagnn/graph.hpp"
#include "uagnn/model.hpp"

namespace uagnn {

// Spectral summary of the effective recurrent matrix W - W^T - gamma I.
// The skew part has eigenvalues +/- i sigma_j, so after the -gamma I shift
// every eigenvalue has real part exactly -gamma.
struct SpectrumReport {
  std::vector<double> singular_values;  // of W - W^T, descending, paired
  double gamma = 0.0;
  double real_part = 0.0;           // -gamma
  double max_real_deviation = 0.0;  // skew-defect bound, 0 in exact arithmetic
};

enum class Regime { Unstable, Dissipative, NonDissipative };
std::string regime_name(Regime r);

/// Eigenvalues of a symmetric matrix via cyclic Jacobi rotations, ascending.
std::vector<double> symmetric_eigenvalues(const DenseMatrix& s);

/// Singular values of W - W^T through the symmetric eigendecomposition of
/// M^T M; no general nonsymmetric eigensolver involved.
SpectrumReport effective_spectrum(const DenseMatrix& w, double gamma);

Regime classify_regime(const SpectrumReport& report, double tol);

struct SensitivityProfile {
  int source = 0;
  std::vector<int> distances;          // BFS distances present in the graph
  std::vector<double> influence;       // mean block Frobenius norm per distance
  std::vector<int> nodes_at_distance;
  std::string model_tag;
};

enum class JacobianMethod { Autodiff, FiniteDifference };

/// Jacobian of X^L w.r.t. the source node's post-embedding state x0_u,
/// stacked as an (n*h) x h matrix; row v*h+c holds d(x^L_v)_c / d x0_u.
DenseMatrix sensitivity_jacobian(const ModelParams& params, const SparseMatrix& op,
                                 const DenseMatrix& x0, const HyperParams& hp,
                                 int source, JacobianMethod method);

/// Per-hop-distance influence of node `source`: Frobenius norms of the
/// Jacobian blocks d x^L_v / d x0_u averaged over nodes v at each BFS
/// distance. Unreachable nodes are excluded.
SensitivityProfile sensitivity_profile(const ModelParams& params, const Graph& g,
                                       const HyperParams& hp, int source,
                                       JacobianMethod method = JacobianMethod::Autodiff,
                                       const std::string& model_tag = "antisymmetric");

/// BFS hop distances from a source; -1 marks unreachable nodes.
std::vector<int> bfs_distances(const Graph& g, int source);

/// Norm trajectory of the linear probe x <- x + eps (W - W^T)^T x applied L
/// times (identity activation, no aggregation, gamma = 0, zero bias).
/// Element 0 is ||X0||_F; element l is the norm after step l.
std::vector<double> linear_probe_norms(const DenseMatrix& w, const DenseMatrix& x0,
                                       double eps, int layers);

}  // namespace uagnn
