#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

// Dense and sparse arithmetic kernels used by the solvers.
//
// Every kernel has a scalar reference implementation and may have SIMD
// variants; the active backend is chosen once at startup (best available)
// and can be overridden with select_backend(). All variants of a kernel
// must agree with the scalar reference up to floating-point reassociation.

namespace ftk::kernels {

using index_t = std::int64_t;

struct Backend {
  const char* name;
  double (*dot)(const double* x, const double* y, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  void (*scale)(double alpha, double* x, std::size_t n);
  void (*spmv)(index_t nrows, const index_t* row_ptr, const index_t* col_idx,
               const double* values, const double* x, double* y);
};

const Backend& scalar_backend();

#if defined(__x86_64__) || defined(_M_X64)
bool avx2_supported();
const Backend& avx2_backend();
#endif

// Active backend control. select_backend accepts "scalar", "avx2" or
// "auto"; returns false (and leaves the backend unchanged) if the request
// is unknown or unsupported on this machine.
const Backend& active_backend();
bool select_backend(std::string_view name);

// Checked convenience wrappers over the active backend.
double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(double alpha, std::span<double> x);

}  // namespace ftk::kernels
