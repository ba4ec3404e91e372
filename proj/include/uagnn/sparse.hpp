#pragma once

#include <vector>

namespace uagnn {

// Compressed-sparse-row matrix. Used for the graph operators (A and the
// normalized propagation operator); these are data, never parameters, so
// there is no gradient support here.
struct SparseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<int> row_offsets;  // size rows + 1, monotone non-decreasing
  std::vector<int> col_indices;  // strictly increasing within each row
  std::vector<double> values;

  static SparseMatrix identity(int n);

  int nnz() const { return static_cast<int>(values.size()); }
  double at(int i, int j) const;   // binary search, test convenience
  void validate() const;           // throws std::invalid_argument on bad CSR
};

}  // namespace uagnn
