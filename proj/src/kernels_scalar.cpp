#include "ftk/kernels.hpp"

namespace ftk::kernels {

namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_scalar(double alpha, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void spmv_scalar(index_t nrows, const index_t* row_ptr, const index_t* col_idx,
                 const double* values, const double* x, double* y) {
  for (index_t i = 0; i < nrows; ++i) {
    double sum = 0.0;
    for (index_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      sum += values[k] * x[col_idx[k]];
    }
    y[i] = sum;
  }
}

}  // namespace

const Backend& scalar_backend() {
  static const Backend backend{"scalar", dot_scalar, axpy_scalar, scale_scalar,
                               spmv_scalar};
  return backend;
}

}  // namespace ftk::kernels
