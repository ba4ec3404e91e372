#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "uagnn/dense.hpp"
#include "uagnn/sparse.hpp"
#include "uagnn/tape.hpp"

namespace uagnn {

enum class Aggregation { Phi1, Phi2 };  // Phi1: raw adjacency, Phi2: normalized

std::string aggregation_name(Aggregation a);
Aggregation aggregation_from_name(const std::string& name);

struct HyperParams {
  int layers = 1;
  int hidden_dim = 32;
  double gamma = 0.1;
  double epsilon = 0.1;
  Aggregation aggregation = Aggregation::Phi2;
  double learning_rate = 0.01;
  double weight_decay = 0.0;
  int max_epochs = 5000;
  int patience = 100;
};

// All trainable matrices: input embedding, the shared recurrent/aggregation
// pair of the Euler steps, and both decoder heads.
struct ModelParams {
  DenseMatrix w_in;   // d x h
  DenseMatrix b_in;   // 1 x h
  DenseMatrix w;      // h x h, antisymmetrized as w - w^T in the update
  DenseMatrix v;      // h x h
  DenseMatrix b;      // 1 x h
  DenseMatrix w_x;    // h x d feature decoder
  DenseMatrix b_x;    // 1 x d
  DenseMatrix w_a;    // h x n adjacency decoder
  DenseMatrix b_a;    // 1 x n

  int input_dim() const { return w_in.rows; }
  int hidden_dim() const { return w_in.cols; }
  int node_count() const { return w_a.cols; }

  // Fixed traversal order shared by the optimizer and serialization.
  std::vector<DenseMatrix*> matrices();
  std::vector<const DenseMatrix*> matrices() const;
  static const std::vector<std::string>& matrix_names();
};

/// Glorot-uniform matrices, zero biases, deterministic per seed.
ModelParams init_params(int d, int h, int n, std::uint64_t seed);

std::string params_to_json(const ModelParams& p);
ModelParams params_from_json(const std::string& text);
void save_params(const ModelParams& p, const std::string& path);
ModelParams load_params(const std::string& path);

// Parameter leaves registered on one tape, in ModelParams order.
struct ModelVars {
  Variable w_in, b_in, w, v, b, w_x, b_x, w_a, b_a;
  std::vector<Variable> all() const { return {w_in, b_in, w, v, b, w_x, b_x, w_a, b_a}; }
};

ModelVars make_leaves(Tape& tape, const ModelParams& params);

struct EncoderOutput {
  Variable xl;                      // n x h final representations
  std::vector<double> layer_norms;  // Frobenius norm after each Euler step
};

struct DecoderOutput {
  Variable xrec;  // n x d, identity output
  Variable arec;  // n x n, sigmoid output
};

/// Raised when a forward pass produces a non-finite intermediate.
struct DivergenceError : std::runtime_error {
  int layer = -1;
  int epoch = -1;
  DivergenceError(const std::string& what, int layer_idx, int epoch_idx = -1)
      : std::runtime_error(what), layer(layer_idx), epoch(epoch_idx) {}
};

/// op * xprev * v on the tape.
Variable aggregate(const SparseMatrix& op, Variable xprev, Variable v, Tape& tape);

/// Input embedding followed by `layers` weight-tied antisymmetric Euler steps:
///   x0 = X w_in + b_in
///   x_l = x_{l-1} + eps * tanh(x_{l-1} (w - w^T - gamma I)^T + op x_{l-1} v + b)
EncoderOutput encode(const ModelVars& vars, const SparseMatrix& op,
                     const DenseMatrix& x, const HyperParams& hp, Tape& tape);

/// The Euler steps alone, starting from an existing state variable. Used for
/// post-embedding sensitivity analysis.
EncoderOutput encode_from_state(const ModelVars& vars, const SparseMatrix& op,
                                Variable x0, const HyperParams& hp, Tape& tape);

/// Tape-free forward returning x^L; bit-identical to encode() on the same
/// inputs (both run the same kernels in the same order).
DenseMatrix encode_values(const ModelParams& params, const SparseMatrix& op,
                          const DenseMatrix& x, const HyperParams& hp);

DecoderOutput decode(const ModelVars& vars, Variable xl, Tape& tape);

/// MSE(A, Arec) + MSE(X, Xrec), each term averaged over its own entry count.
Variable reconstruction_loss(const DenseMatrix& a_target, const DenseMatrix& x_target,
                             DecoderOutput rec, Tape& tape);

/// Dense 0/1 adjacency target over an edge subset (both directions, zero
/// diagonal).
DenseMatrix dense_adjacency_target(int n, const std::vector<std::pair<int, int>>& edges);

}  // namespace uagnn
