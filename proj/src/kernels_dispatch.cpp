#include "ftk/kernels.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

namespace ftk::kernels {

namespace {

const Backend* pick_auto() {
#if defined(__x86_64__) || defined(_M_X64)
  if (avx2_supported()) return &avx2_backend();
#endif
  return &scalar_backend();
}

std::atomic<const Backend*>& active_slot() {
  static std::atomic<const Backend*> slot{pick_auto()};
  return slot;
}

}  // namespace

const Backend& active_backend() { return *active_slot().load(); }

bool select_backend(std::string_view name) {
  if (name == "auto") {
    active_slot().store(pick_auto());
    return true;
  }
  if (name == "scalar") {
    active_slot().store(&scalar_backend());
    return true;
  }
#if defined(__x86_64__) || defined(_M_X64)
  if (name == "avx2" && avx2_supported()) {
    active_slot().store(&avx2_backend());
    return true;
  }
#endif
  return false;
}

double dot(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("dot: length mismatch");
  return active_backend().dot(x.data(), y.data(), x.size());
}

double norm2(std::span<const double> x) {
  // Fast path via the active dot kernel; rescale when the naive sum of
  // squares would overflow or lose everything to underflow.
  double amax = 0.0;
  for (double v : x) amax = std::max(amax, std::fabs(v));
  if (amax > 1e140 && std::isfinite(amax)) {
    double ssq = 0.0;
    for (double v : x) {
      const double t = v / amax;
      ssq += t * t;
    }
    return amax * std::sqrt(ssq);
  }
  return std::sqrt(active_backend().dot(x.data(), x.data(), x.size()));
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size())
    throw std::invalid_argument("axpy: length mismatch");
  active_backend().axpy(alpha, x.data(), y.data(), x.size());
}

void scale(double alpha, std::span<double> x) {
  active_backend().scale(alpha, x.data(), x.size());
}

}  // namespace ftk::kernels
