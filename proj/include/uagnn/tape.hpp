#pragma once

#include <functional>
#include <vector>

#include "uagnn/dense.hpp"
#include "uagnn/sparse.hpp"

namespace uagnn {

class Tape;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Variable {
 public:
  Variable() = default;
  const DenseMatrix& value() const;
  int rows() const { return value().rows; }
  int cols() const { return value().cols; }
  int node() const { return node_; }
  Tape* tape() const { return tape_; }

 private:
  friend class Tape;
  Variable(Tape* t, int node) : tape_(t), node_(node) {}
  Tape* tape_ = nullptr;
  int node_ = -1;
};

// Append-only record of a forward computation over dense matrices with a
// fixed operation vocabulary. Operand references always point to earlier
// nodes, so one reverse sweep in index order settles every adjoint. Forward
// values are computed eagerly through the shared dense kernels; recorded
// sparse operands are borrowed and must outlive the tape.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Variable input(DenseMatrix value, bool requires_grad);

  Variable matmul(Variable a, Variable b);
  Variable spmm(const SparseMatrix& s, Variable b);
  Variable add(Variable a, Variable b);
  Variable sub(Variable a, Variable b);
  Variable scale(Variable a, double c);
  Variable transpose(Variable a);
  Variable add_row_bias(Variable a, Variable bias);
  Variable tanh(Variable a);
  Variable sigmoid(Variable a);
  Variable mse(Variable pred, DenseMatrix target);  // mean over all entries

  /// Reverse sweep from a 1x1 loss. One backward per tape build.
  void backward(Variable loss);

  /// Diagnostic entry point for Jacobian assembly: seeds an arbitrary node
  /// with an arbitrary adjoint and runs a full reverse sweep. Unlike
  /// backward(), repeated calls on the same tape are allowed; each call
  /// discards previous adjoints.
  void backward_seeded(Variable out, const DenseMatrix& seed);

  /// Adjoint of a node after backward. Zero matrix if the loss does not
  /// depend on it.
  const DenseMatrix& grad(Variable v) const;

  const DenseMatrix& value(int node) const { return nodes_[node].value; }
  int size() const { return static_cast<int>(nodes_.size()); }

 private:
  enum class Op {
    Input,
    MatMul,
    SpMM,
    Add,
    Sub,
    Scale,
    Transpose,
    AddRowBias,
    Tanh,
    Sigmoid,
    Mse,
  };

  struct Node {
    Op op = Op::Input;
    int a = -1;
    int b = -1;
    DenseMatrix value;
    double scalar = 0.0;                    // Scale factor
    const SparseMatrix* sparse = nullptr;   // SpMM operand, borrowed
    DenseMatrix constant;                   // Mse target
    bool needs_grad = false;                // any path to a grad leaf
  };

  Variable record(Node node);
  void sweep();
  friend class Variable;

  std::vector<Node> nodes_;
  std::vector<DenseMatrix> adjoints_;
  bool backward_done_ = false;
};

/// Numerical gradient verification. Rebuilds the loss through `build` on a
/// fresh tape for the analytic pass and on perturbed parameters for central
/// differences; returns the max over parameter entries of
/// |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
using LossBuilder =
    std::function<Variable(Tape&, const std::vector<Variable>&)>;
double grad_check(const LossBuilder& build,
                  const std::vector<DenseMatrix>& params, double h = 1e-5);

}  // namespace uagnn
