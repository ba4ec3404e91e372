#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace uagnn {

struct SparseMatrix;

// Row-major dense matrix of 64-bit reals. Plain value type; every numeric
// kernel in the project goes through the free functions below so that tape
// and tape-free code paths produce bit-identical results.
struct DenseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  static DenseMatrix identity(int n);
  static DenseMatrix from_rows(const std::vector<std::vector<double>>& rows);

  double& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }

  bool same_shape(const DenseMatrix& o) const { return rows == o.rows && cols == o.cols; }
  std::size_t size() const { return data.size(); }
};

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix transpose(const DenseMatrix& a);
DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix sub(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix scale(const DenseMatrix& a, double c);
DenseMatrix hadamard(const DenseMatrix& a, const DenseMatrix& b);
// a + ones * bias, bias is 1 x cols
DenseMatrix add_row_bias(const DenseMatrix& a, const DenseMatrix& bias);
DenseMatrix tanh_elem(const DenseMatrix& a);
DenseMatrix sigmoid_elem(const DenseMatrix& a);
DenseMatrix col_sums(const DenseMatrix& a);  // 1 x cols

// Sparse-dense products. spmm_transposed computes s^T * b by row scatter,
// so no explicit CSR transpose is ever materialized.
DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& b);
DenseMatrix spmm_transposed(const SparseMatrix& s, const DenseMatrix& b);

double frobenius_norm(const DenseMatrix& a);
double max_abs(const DenseMatrix& a);
bool all_finite(const DenseMatrix& a);

void add_in_place(DenseMatrix& a, const DenseMatrix& b);
void sub_in_place(DenseMatrix& a, const DenseMatrix& b);

std::string shape_string(const DenseMatrix& a);

}  // namespace uagnn
