#include "uagnn/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "uagnn/rng.hpp"

namespace uagnn {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

DenseMatrix glorot_uniform(int rows, int cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / (rows + cols));
  DenseMatrix m(rows, cols);
  for (double& x : m.data) x = rng.uniform(-bound, bound);
  return m;
}

// 17 significant digits: enough for every double to parse back bit-exactly.
void append_real(std::string& out, double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  out += buf;
}

void append_matrix(std::string& out, const DenseMatrix& m) {
  out += '[';
  for (int i = 0; i < m.rows; ++i) {
    if (i) out += ',';
    out += '[';
    for (int j = 0; j < m.cols; ++j) {
      if (j) out += ',';
      append_real(out, m(i, j));
    }
    out += ']';
  }
  out += ']';
}

DenseMatrix matrix_from_json(const nlohmann::json& rows) {
  std::vector<std::vector<double>> data;
  for (const auto& row : rows) data.push_back(row.get<std::vector<double>>());
  return DenseMatrix::from_rows(data);
}

}  // namespace

std::string aggregation_name(Aggregation a) {
  return a == Aggregation::Phi1 ? "phi1" : "phi2";
}

Aggregation aggregation_from_name(const std::string& name) {
  if (name == "phi1") return Aggregation::Phi1;
  if (name == "phi2") return Aggregation::Phi2;
  throw std::invalid_argument("unknown aggregation: " + name);
}

std::vector<DenseMatrix*> ModelParams::matrices() {
  return {&w_in, &b_in, &w, &v, &b, &w_x, &b_x, &w_a, &b_a};
}

std::vector<const DenseMatrix*> ModelParams::matrices() const {
  return {&w_in, &b_in, &w, &v, &b, &w_x, &b_x, &w_a, &b_a};
}

const std::vector<std::string>& ModelParams::matrix_names() {
  static const std::vector<std::string> names = {"w_in", "b_in", "w",   "v",  "b",
                                                 "w_x",  "b_x",  "w_a", "b_a"};
  return names;
}

ModelParams init_params(int d, int h, int n, std::uint64_t seed) {
  require(d >= 1 && h >= 1 && n >= 1, "init_params: dimensions must be positive");
  Rng rng(seed);
  ModelParams p;
  p.w_in = glorot_uniform(d, h, rng);
  p.b_in = DenseMatrix(1, h);
  p.w = glorot_uniform(h, h, rng);
  p.v = glorot_uniform(h, h, rng);
  p.b = DenseMatrix(1, h);
  p.w_x = glorot_uniform(h, d, rng);
  p.b_x = DenseMatrix(1, d);
  p.w_a = glorot_uniform(h, n, rng);
  p.b_a = DenseMatrix(1, n);
  return p;
}

std::string params_to_json(const ModelParams& p) {
  std::string out;
  out += "{\"d\":" + std::to_string(p.input_dim());
  out += ",\"h\":" + std::to_string(p.hidden_dim());
  out += ",\"n\":" + std::to_string(p.node_count());
  const auto mats = p.matrices();
  const auto& names = ModelParams::matrix_names();
  for (std::size_t i = 0; i < mats.size(); ++i) {
    out += ",\"" + names[i] + "\":";
    append_matrix(out, *mats[i]);
  }
  out += '}';
  return out;
}

ModelParams params_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  ModelParams p;
  const auto mats = p.matrices();
  const auto& names = ModelParams::matrix_names();
  for (std::size_t i = 0; i < mats.size(); ++i) {
    if (!j.contains(names[i]))
      throw std::invalid_argument("params json missing field " + names[i]);
    *mats[i] = matrix_from_json(j[names[i]]);
  }
  require(p.w_in.cols == p.w.rows && p.w.rows == p.w.cols, "params json: inconsistent shapes");
  return p;
}

void save_params(const ModelParams& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << params_to_json(p) << '\n';
}

ModelParams load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return params_from_json(ss.str());
}

ModelVars make_leaves(Tape& tape, const ModelParams& params) {
  ModelVars v;
  v.w_in = tape.input(params.w_in, true);
  v.b_in = tape.input(params.b_in, true);
  v.w = tape.input(params.w, true);
  v.v = tape.input(params.v, true);
  v.b = tape.input(params.b, true);
  v.w_x = tape.input(params.w_x, true);
  v.b_x = tape.input(params.b_x, true);
  v.w_a = tape.input(params.w_a, true);
  v.b_a = tape.input(params.b_a, true);
  return v;
}

Variable aggregate(const SparseMatrix& op, Variable xprev, Variable v, Tape& tape) {
  return tape.matmul(tape.spmm(op, xprev), v);
}

EncoderOutput encode_from_state(const ModelVars& vars, const SparseMatrix& op,
                                Variable x0, const HyperParams& hp, Tape& tape) {
  require(hp.layers >= 0, "encode: layers must be non-negative");
  const int h = vars.w.value().rows;

  // (w - w^T - gamma I)^T, built once and shared across the tied steps.
  Variable skew = tape.sub(vars.w, tape.transpose(vars.w));
  Variable shift = tape.input(scale(DenseMatrix::identity(h), hp.gamma), false);
  Variable recurrent_t = tape.transpose(tape.sub(skew, shift));

  EncoderOutput out;
  Variable x = x0;
  for (int layer = 1; layer <= hp.layers; ++layer) {
    Variable pre = tape.add(tape.matmul(x, recurrent_t), aggregate(op, x, vars.v, tape));
    pre = tape.add_row_bias(pre, vars.b);
    x = tape.add(x, tape.scale(tape.tanh(pre), hp.epsilon));
    if (!all_finite(x.value()))
      throw DivergenceError("non-finite state at layer " + std::to_string(layer), layer);
    out.layer_norms.push_back(frobenius_norm(x.value()));
  }
  out.xl = x;
  return out;
}

EncoderOutput encode(const ModelVars& vars, const SparseMatrix& op,
                     const DenseMatrix& x, const HyperParams& hp, Tape& tape) {
  require(x.cols == vars.w_in.value().rows, "encode: feature dim mismatch");
  require(op.rows == x.rows && op.cols == x.rows, "encode: operator dim mismatch");
  Variable features = tape.input(x, false);
  Variable x0 = tape.add_row_bias(tape.matmul(features, vars.w_in), vars.b_in);
  return encode_from_state(vars, op, x0, hp, tape);
}

DenseMatrix encode_values(const ModelParams& params, const SparseMatrix& op,
                          const DenseMatrix& x, const HyperParams& hp) {
  // Mirrors encode() kernel-for-kernel so values are bit-identical.
  const int h = params.hidden_dim();
  DenseMatrix x0 = add_row_bias(matmul(x, params.w_in), params.b_in);
  DenseMatrix skew = sub(params.w, transpose(params.w));
  DenseMatrix recurrent_t =
      transpose(sub(skew, scale(DenseMatrix::identity(h), hp.gamma)));
  DenseMatrix state = x0;
  for (int layer = 1; layer <= hp.layers; ++layer) {
    DenseMatrix pre = add(matmul(state, recurrent_t), matmul(spmm(op, state), params.v));
    pre = add_row_bias(pre, params.b);
    state = add(state, scale(tanh_elem(pre), hp.epsilon));
    if (!all_finite(state))
      throw DivergenceError("non-finite state at layer " + std::to_string(layer), layer);
  }
  return state;
}

DecoderOutput decode(const ModelVars& vars, Variable xl, Tape& tape) {
  DecoderOutput out;
  out.xrec = tape.add_row_bias(tape.matmul(xl, vars.w_x), vars.b_x);
  out.arec = tape.sigmoid(tape.add_row_bias(tape.matmul(xl, vars.w_a), vars.b_a));
  return out;
}

Variable reconstruction_loss(const DenseMatrix& a_target, const DenseMatrix& x_target,
                             DecoderOutput rec, Tape& tape) {
  return tape.add(tape.mse(rec.arec, a_target), tape.mse(rec.xrec, x_target));
}

DenseMatrix dense_adjacency_target(int n, const std::vector<std::pair<int, int>>& edges) {
  DenseMatrix a(n, n);
  for (const auto& [u, v] : edges) {
    a(u, v) = 1.0;
    a(v, u) = 1.0;
  }
  return a;
}

}  // namespace uagnn
