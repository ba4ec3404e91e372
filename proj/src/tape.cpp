#include "uagnn/tape.hpp"

#include <cmath>
#include <stdexcept>

namespace uagnn {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

const DenseMatrix& Variable::value() const { return tape_->value(node_); }

Variable Tape::record(Node node) {
  if (node.a >= 0) node.needs_grad = node.needs_grad || nodes_[node.a].needs_grad;
  if (node.b >= 0) node.needs_grad = node.needs_grad || nodes_[node.b].needs_grad;
  nodes_.push_back(std::move(node));
  return Variable(this, static_cast<int>(nodes_.size()) - 1);
}

Variable Tape::input(DenseMatrix value, bool requires_grad) {
  require(all_finite(value), "input: non-finite value");
  Node n;
  n.op = Op::Input;
  n.value = std::move(value);
  n.needs_grad = requires_grad;
  return record(std::move(n));
}

Variable Tape::matmul(Variable a, Variable b) {
  Node n;
  n.op = Op::MatMul;
  n.a = a.node();
  n.b = b.node();
  n.value = uagnn::matmul(a.value(), b.value());
  return record(std::move(n));
}

Variable Tape::spmm(const SparseMatrix& s, Variable b) {
  Node n;
  n.op = Op::SpMM;
  n.b = b.node();
  n.sparse = &s;
  n.value = uagnn::spmm(s, b.value());
  return record(std::move(n));
}

Variable Tape::add(Variable a, Variable b) {
  Node n;
  n.op = Op::Add;
  n.a = a.node();
  n.b = b.node();
  n.value = uagnn::add(a.value(), b.value());
  return record(std::move(n));
}

Variable Tape::sub(Variable a, Variable b) {
  Node n;
  n.op = Op::Sub;
  n.a = a.node();
  n.b = b.node();
  n.value = uagnn::sub(a.value(), b.value());
  return record(std::move(n));
}

Variable Tape::scale(Variable a, double c) {
  Node n;
  n.op = Op::Scale;
  n.a = a.node();
  n.scalar = c;
  n.value = uagnn::scale(a.value(), c);
  return record(std::move(n));
}

Variable Tape::transpose(Variable a) {
  Node n;
  n.op = Op::Transpose;
  n.a = a.node();
  n.value = uagnn::transpose(a.value());
  return record(std::move(n));
}

Variable Tape::add_row_bias(Variable a, Variable bias) {
  Node n;
  n.op = Op::AddRowBias;
  n.a = a.node();
  n.b = bias.node();
  n.value = uagnn::add_row_bias(a.value(), bias.value());
  return record(std::move(n));
}

Variable Tape::tanh(Variable a) {
  Node n;
  n.op = Op::Tanh;
  n.a = a.node();
  n.value = tanh_elem(a.value());
  return record(std::move(n));
}

Variable Tape::sigmoid(Variable a) {
  Node n;
  n.op = Op::Sigmoid;
  n.a = a.node();
  n.value = sigmoid_elem(a.value());
  return record(std::move(n));
}

Variable Tape::mse(Variable pred, DenseMatrix target) {
  require(pred.value().same_shape(target),
          "mse: shape mismatch (" + shape_string(pred.value()) + " vs " +
              shape_string(target) + ")");
  Node n;
  n.op = Op::Mse;
  n.a = pred.node();
  double sum = 0.0;
  const DenseMatrix& p = pred.value();
  for (std::size_t i = 0; i < p.data.size(); ++i) {
    const double diff = p.data[i] - target.data[i];
    sum += diff * diff;
  }
  n.value = DenseMatrix(1, 1);
  n.value(0, 0) = sum / static_cast<double>(p.data.size());
  n.constant = std::move(target);
  return record(std::move(n));
}

void Tape::backward(Variable loss) {
  if (backward_done_) throw std::logic_error("backward called twice on one tape");
  require(loss.tape() == this, "backward: variable from another tape");
  require(loss.rows() == 1 && loss.cols() == 1, "backward: loss must be 1x1");
  backward_done_ = true;

  adjoints_.assign(nodes_.size(), DenseMatrix());
  adjoints_[loss.node()] = DenseMatrix(1, 1);
  adjoints_[loss.node()](0, 0) = 1.0;
  sweep();
}

void Tape::backward_seeded(Variable out, const DenseMatrix& seed) {
  require(out.tape() == this, "backward_seeded: variable from another tape");
  require(out.value().same_shape(seed), "backward_seeded: seed shape mismatch");
  adjoints_.assign(nodes_.size(), DenseMatrix());
  adjoints_[out.node()] = seed;
  sweep();
}

void Tape::sweep() {
  auto accumulate = [&](int node, DenseMatrix contribution) {
    if (node < 0 || !nodes_[node].needs_grad) return;
    DenseMatrix& adj = adjoints_[node];
    if (adj.data.empty()) {
      adj = std::move(contribution);
    } else {
      add_in_place(adj, contribution);
    }
  };

  for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
    const Node& node = nodes_[i];
    if (!node.needs_grad) continue;
    const DenseMatrix& up = adjoints_[i];
    if (up.data.empty()) continue;  // loss does not depend on this node

    switch (node.op) {
      case Op::Input:
        break;
      case Op::MatMul:
        accumulate(node.a, uagnn::matmul(up, uagnn::transpose(nodes_[node.b].value)));
        accumulate(node.b, uagnn::matmul(uagnn::transpose(nodes_[node.a].value), up));
        break;
      case Op::SpMM:
        accumulate(node.b, spmm_transposed(*node.sparse, up));
        break;
      case Op::Add:
        accumulate(node.a, up);
        accumulate(node.b, up);
        break;
      case Op::Sub:
        accumulate(node.a, up);
        accumulate(node.b, uagnn::scale(up, -1.0));
        break;
      case Op::Scale:
        accumulate(node.a, uagnn::scale(up, node.scalar));
        break;
      case Op::Transpose:
        accumulate(node.a, uagnn::transpose(up));
        break;
      case Op::AddRowBias:
        accumulate(node.a, up);
        accumulate(node.b, col_sums(up));
        break;
      case Op::Tanh: {
        DenseMatrix d = node.value;  // y -> 1 - y^2
        for (double& y : d.data) y = 1.0 - y * y;
        accumulate(node.a, hadamard(up, d));
        break;
      }
      case Op::Sigmoid: {
        DenseMatrix d = node.value;  // y -> y (1 - y)
        for (double& y : d.data) y = y * (1.0 - y);
        accumulate(node.a, hadamard(up, d));
        break;
      }
      case Op::Mse: {
        const DenseMatrix& pred = nodes_[node.a].value;
        DenseMatrix d(pred.rows, pred.cols);
        const double coeff = 2.0 * up(0, 0) / static_cast<double>(pred.data.size());
        for (std::size_t e = 0; e < d.data.size(); ++e)
          d.data[e] = coeff * (pred.data[e] - node.constant.data[e]);
        accumulate(node.a, std::move(d));
        break;
      }
    }
  }

  // Leaves untouched by the loss get explicit zero gradients.
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].needs_grad && adjoints_[i].data.empty())
      adjoints_[i] = DenseMatrix(nodes_[i].value.rows, nodes_[i].value.cols);
  }
}

const DenseMatrix& Tape::grad(Variable v) const {
  require(v.tape() == this, "grad: variable from another tape");
  if (adjoints_.empty()) throw std::logic_error("grad requested before backward");
  return adjoints_[v.node()];
}

double grad_check(const LossBuilder& build, const std::vector<DenseMatrix>& params,
                  double h) {
  // Analytic gradients.
  std::vector<DenseMatrix> analytic;
  {
    Tape tape;
    std::vector<Variable> leaves;
    leaves.reserve(params.size());
    for (const DenseMatrix& p : params) leaves.push_back(tape.input(p, true));
    Variable loss = build(tape, leaves);
    require(loss.rows() == 1 && loss.cols() == 1, "grad_check: loss must be 1x1");
    tape.backward(loss);
    for (const Variable& leaf : leaves) analytic.push_back(tape.grad(leaf));
  }

  auto eval = [&](const std::vector<DenseMatrix>& theta) {
    Tape tape;
    std::vector<Variable> leaves;
    leaves.reserve(theta.size());
    for (const DenseMatrix& p : theta) leaves.push_back(tape.input(p, false));
    const double value = build(tape, leaves).value()(0, 0);
    if (!std::isfinite(value)) throw std::runtime_error("grad_check: non-finite loss at probe");
    return value;
  };

  double worst = 0.0;
  std::vector<DenseMatrix> probe = params;
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (std::size_t e = 0; e < params[p].data.size(); ++e) {
      const double saved = probe[p].data[e];
      probe[p].data[e] = saved + h;
      const double f_plus = eval(probe);
      probe[p].data[e] = saved - h;
      const double f_minus = eval(probe);
      probe[p].data[e] = saved;

      const double numeric = (f_plus - f_minus) / (2.0 * h);
      const double a = analytic[p].data[e];
      const double rel =
          std::fabs(a - numeric) / std::max(1e-8, std::fabs(a) + std::fabs(numeric));
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

}  // namespace uagnn
