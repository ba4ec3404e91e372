#include "uagnn/dense.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "uagnn/sparse.hpp"

namespace uagnn {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

DenseMatrix DenseMatrix::identity(int n) {
  DenseMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  DenseMatrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (int i = 0; i < m.rows; ++i) {
    require(static_cast<int>(rows[i].size()) == m.cols, "from_rows: ragged rows");
    for (int j = 0; j < m.cols; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

std::string shape_string(const DenseMatrix& a) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%dx%d", a.rows, a.cols);
  return buf;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.cols == b.rows, "matmul: inner dimensions differ (" + shape_string(a) +
                                " * " + shape_string(b) + ")");
  DenseMatrix c(a.rows, b.cols);
  // ikj order: streams through b and c rows.
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = &a.data[static_cast<std::size_t>(i) * a.cols];
    double* crow = &c.data[static_cast<std::size_t>(i) * c.cols];
    for (int k = 0; k < a.cols; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = &b.data[static_cast<std::size_t>(k) * b.cols];
      for (int j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix t(a.cols, a.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
  return t;
}

DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.same_shape(b), "add: shape mismatch");
  DenseMatrix c = a;
  for (std::size_t i = 0; i < c.data.size(); ++i) c.data[i] += b.data[i];
  return c;
}

DenseMatrix sub(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.same_shape(b), "sub: shape mismatch");
  DenseMatrix c = a;
  for (std::size_t i = 0; i < c.data.size(); ++i) c.data[i] -= b.data[i];
  return c;
}

DenseMatrix scale(const DenseMatrix& a, double c) {
  DenseMatrix r = a;
  for (double& x : r.data) x *= c;
  return r;
}

DenseMatrix hadamard(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.same_shape(b), "hadamard: shape mismatch");
  DenseMatrix c = a;
  for (std::size_t i = 0; i < c.data.size(); ++i) c.data[i] *= b.data[i];
  return c;
}

DenseMatrix add_row_bias(const DenseMatrix& a, const DenseMatrix& bias) {
  require(bias.rows == 1 && bias.cols == a.cols, "add_row_bias: bias must be 1x" +
                                                     std::to_string(a.cols));
  DenseMatrix c = a;
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) c(i, j) += bias(0, j);
  return c;
}

DenseMatrix tanh_elem(const DenseMatrix& a) {
  DenseMatrix c = a;
  for (double& x : c.data) x = std::tanh(x);
  return c;
}

DenseMatrix sigmoid_elem(const DenseMatrix& a) {
  DenseMatrix c = a;
  for (double& x : c.data) x = 1.0 / (1.0 + std::exp(-x));
  return c;
}

DenseMatrix col_sums(const DenseMatrix& a) {
  DenseMatrix s(1, a.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) s(0, j) += a(i, j);
  return s;
}

DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& b) {
  require(s.cols == b.rows, "spmm: inner dimensions differ");
  DenseMatrix c(s.rows, b.cols);
  for (int i = 0; i < s.rows; ++i) {
    double* crow = &c.data[static_cast<std::size_t>(i) * c.cols];
    for (int p = s.row_offsets[i]; p < s.row_offsets[i + 1]; ++p) {
      const double v = s.values[p];
      const double* brow = &b.data[static_cast<std::size_t>(s.col_indices[p]) * b.cols];
      for (int j = 0; j < b.cols; ++j) crow[j] += v * brow[j];
    }
  }
  return c;
}

DenseMatrix spmm_transposed(const SparseMatrix& s, const DenseMatrix& b) {
  require(s.rows == b.rows, "spmm_transposed: inner dimensions differ");
  DenseMatrix c(s.cols, b.cols);
  for (int i = 0; i < s.rows; ++i) {
    const double* brow = &b.data[static_cast<std::size_t>(i) * b.cols];
    for (int p = s.row_offsets[i]; p < s.row_offsets[i + 1]; ++p) {
      const double v = s.values[p];
      double* crow = &c.data[static_cast<std::size_t>(s.col_indices[p]) * c.cols];
      for (int j = 0; j < b.cols; ++j) crow[j] += v * brow[j];
    }
  }
  return c;
}

double frobenius_norm(const DenseMatrix& a) {
  double s = 0.0;
  for (double x : a.data) s += x * x;
  return std::sqrt(s);
}

double max_abs(const DenseMatrix& a) {
  double m = 0.0;
  for (double x : a.data) m = std::max(m, std::fabs(x));
  return m;
}

bool all_finite(const DenseMatrix& a) {
  for (double x : a.data)
    if (!std::isfinite(x)) return false;
  return true;
}

void add_in_place(DenseMatrix& a, const DenseMatrix& b) {
  require(a.same_shape(b), "add_in_place: shape mismatch");
  for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
}

void sub_in_place(DenseMatrix& a, const DenseMatrix& b) {
  require(a.same_shape(b), "sub_in_place: shape mismatch");
  for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] -= b.data[i];
}

SparseMatrix SparseMatrix::identity(int n) {
  SparseMatrix s;
  s.rows = s.cols = n;
  s.row_offsets.resize(n + 1);
  s.col_indices.resize(n);
  s.values.assign(n, 1.0);
  for (int i = 0; i < n; ++i) {
    s.row_offsets[i] = i;
    s.col_indices[i] = i;
  }
  s.row_offsets[n] = n;
  return s;
}

double SparseMatrix::at(int i, int j) const {
  const auto begin = col_indices.begin() + row_offsets[i];
  const auto end = col_indices.begin() + row_offsets[i + 1];
  const auto it = std::lower_bound(begin, end, j);
  if (it == end || *it != j) return 0.0;
  return values[static_cast<std::size_t>(it - col_indices.begin())];
}

void SparseMatrix::validate() const {
  require(static_cast<int>(row_offsets.size()) == rows + 1, "csr: bad offset count");
  require(row_offsets.front() == 0, "csr: offsets must start at 0");
  require(col_indices.size() == values.size(), "csr: index/value count mismatch");
  require(row_offsets.back() == static_cast<int>(values.size()),
          "csr: final offset must equal value count");
  for (int i = 0; i < rows; ++i) {
    require(row_offsets[i] <= row_offsets[i + 1], "csr: offsets not monotone");
    for (int p = row_offsets[i]; p < row_offsets[i + 1]; ++p) {
      require(col_indices[p] >= 0 && col_indices[p] < cols, "csr: column out of range");
      if (p > row_offsets[i])
        require(col_indices[p] > col_indices[p - 1], "csr: columns not strictly increasing");
    }
  }
}

}  // namespace uagnn
