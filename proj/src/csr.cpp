#include "ftk/csr.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ftk/kernels.hpp"

namespace ftk {

void CsrMatrix::validate() const {
  if (nrows < 0 || ncols < 0)
    throw std::invalid_argument("CsrMatrix: negative dimension");
  if (row_ptr.size() != static_cast<std::size_t>(nrows) + 1)
    throw std::invalid_argument("CsrMatrix: row_ptr length != nrows+1");
  if (col_idx.size() != values.size())
    throw std::invalid_argument("CsrMatrix: col_idx / values length mismatch");
  if (row_ptr.front() != 0)
    throw std::invalid_argument("CsrMatrix: row_ptr[0] != 0");
  if (row_ptr.back() != nnz())
    throw std::invalid_argument("CsrMatrix: row_ptr[nrows] != nnz");
  for (index_t i = 0; i < nrows; ++i) {
    if (row_ptr[i] > row_ptr[i + 1])
      throw std::invalid_argument("CsrMatrix: row_ptr not nondecreasing at row " +
                                  std::to_string(i));
    for (index_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      if (col_idx[k] < 0 || col_idx[k] >= ncols)
        throw std::invalid_argument("CsrMatrix: column index out of range");
      if (k > row_ptr[i] && col_idx[k] <= col_idx[k - 1])
        throw std::invalid_argument(
            "CsrMatrix: columns not strictly increasing in row " +
            std::to_string(i));
    }
  }
}

CsrMatrix csr_from_triplets(index_t nrows, index_t ncols,
                            std::vector<Triplet> triplets) {
  for (const auto& [r, c, v] : triplets) {
    if (r < 0 || r >= nrows || c < 0 || c >= ncols)
      throw std::invalid_argument("csr_from_triplets: index out of range");
  }
  std::sort(triplets.begin(), triplets.end(),
            [](const Triplet& a, const Triplet& b) {
              return std::tie(std::get<0>(a), std::get<1>(a)) <
                     std::tie(std::get<0>(b), std::get<1>(b));
            });

  CsrMatrix A;
  A.nrows = nrows;
  A.ncols = ncols;
  A.row_ptr.assign(static_cast<std::size_t>(nrows) + 1, 0);
  A.col_idx.reserve(triplets.size());
  A.values.reserve(triplets.size());

  index_t prev_r = -1;
  index_t prev_c = -1;
  for (const auto& [r, c, v] : triplets) {
    if (r == prev_r && c == prev_c) {
      A.values.back() += v;  // duplicate coordinate: sum
    } else {
      A.col_idx.push_back(c);
      A.values.push_back(v);
      A.row_ptr[static_cast<std::size_t>(r) + 1] += 1;
      prev_r = r;
      prev_c = c;
    }
  }
  for (index_t i = 0; i < nrows; ++i) A.row_ptr[i + 1] += A.row_ptr[i];
  A.validate();
  return A;
}

CsrMatrix csr_identity(index_t n) {
  CsrMatrix A;
  A.nrows = A.ncols = n;
  A.row_ptr.resize(static_cast<std::size_t>(n) + 1);
  A.col_idx.resize(static_cast<std::size_t>(n));
  A.values.assign(static_cast<std::size_t>(n), 1.0);
  for (index_t i = 0; i <= n; ++i) A.row_ptr[i] = i;
  for (index_t i = 0; i < n; ++i) A.col_idx[i] = i;
  return A;
}

CsrMatrix gen_log_diagonal(index_t n, double decades) {
  if (n < 2) throw std::invalid_argument("gen_log_diagonal: n must be >= 2");
  if (!(decades > 0.0))
    throw std::invalid_argument("gen_log_diagonal: decades must be > 0");
  CsrMatrix A = csr_identity(n);
  for (index_t i = 0; i < n; ++i) {
    // Divide first so the last exponent is exactly -decades; the ratio of
    // extreme entries then matches 10^decades to a few ulps.
    const double f = static_cast<double>(i) / static_cast<double>(n - 1);
    A.values[i] = std::pow(10.0, -decades * f);
  }
  return A;
}

void spmv_into(const CsrMatrix& A, const DenseVector& x, DenseVector& y) {
  if (static_cast<index_t>(x.size()) != A.ncols)
    throw std::invalid_argument("spmv: x length != ncols");
  y.resize(static_cast<std::size_t>(A.nrows));
  kernels::active_backend().spmv(A.nrows, A.row_ptr.data(), A.col_idx.data(),
                                 A.values.data(), x.data(), y.data());
}

DenseVector spmv(const CsrMatrix& A, const DenseVector& x) {
  DenseVector y;
  spmv_into(A, x, y);
  return y;
}

}  // namespace ftk
