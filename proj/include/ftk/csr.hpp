#pragma once

#include <cstdint>
#include <tuple>
#include <vector>

namespace ftk {

using index_t = std::int64_t;

/// Dense vector of 64-bit floats.
using DenseVector = std::vector<double>;

/// Compressed sparse row matrix. Column indices are strictly increasing
/// within each row; row_ptr is nondecreasing with row_ptr[0] == 0 and
/// row_ptr[nrows] == nnz. The index arrays describe the sparsity structure
/// and are never subject to fault injection; only `values` may be.
struct CsrMatrix {
  index_t nrows = 0;
  index_t ncols = 0;
  std::vector<index_t> row_ptr;
  std::vector<index_t> col_idx;
  std::vector<double> values;

  index_t nnz() const { return static_cast<index_t>(values.size()); }

  /// Throws std::invalid_argument if any structural invariant is violated.
  void validate() const;

  bool operator==(const CsrMatrix&) const = default;
};

/// Coordinate triplet (row, col, value), all 0-based.
using Triplet = std::tuple<index_t, index_t, double>;

/// Builds a CSR matrix from unsorted triplets. Duplicate coordinates are
/// summed; rows come out sorted by column.
CsrMatrix csr_from_triplets(index_t nrows, index_t ncols,
                            std::vector<Triplet> triplets);

/// n-by-n identity.
CsrMatrix csr_identity(index_t n);

/// Diagonal matrix with entries 10^(-decades * i / (n - 1)), i = 0..n-1:
/// base-10 logarithmically spaced from 1 down to 10^(-decades).
/// Requires n >= 2 and decades > 0.
CsrMatrix gen_log_diagonal(index_t n, double decades);

/// y = A * x. Requires x.size() == A.ncols and y.size() == A.nrows.
void spmv_into(const CsrMatrix& A, const DenseVector& x, DenseVector& y);
DenseVector spmv(const CsrMatrix& A, const DenseVector& x);

}  // namespace ftk
