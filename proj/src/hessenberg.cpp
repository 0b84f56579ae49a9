#include "ftk/hessenberg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ftk {

Hessenberg::Hessenberg(int m_max, double beta) : m_max_(m_max), beta_(beta) {
  if (m_max < 1) throw std::invalid_argument("Hessenberg: m_max must be >= 1");
  const auto ld = static_cast<std::size_t>(m_max + 1);
  raw_.assign(ld * static_cast<std::size_t>(m_max), 0.0);
  r_.assign(ld * static_cast<std::size_t>(m_max), 0.0);
  cs_.assign(static_cast<std::size_t>(m_max), 0.0);
  sn_.assign(static_cast<std::size_t>(m_max), 0.0);
  g_.assign(ld, 0.0);
  g_[0] = beta;
}

void Hessenberg::store_column(int j, std::span<const double> h,
                              double subdiag) {
  if (j != committed_)
    throw std::invalid_argument("Hessenberg: columns must be stored in order");
  if (j >= m_max_) throw std::invalid_argument("Hessenberg: capacity exceeded");
  if (h.size() != static_cast<std::size_t>(j) + 1)
    throw std::invalid_argument("Hessenberg: wrong coefficient count");
  for (int i = 0; i <= j; ++i) raw_[idx(i, j)] = h[static_cast<std::size_t>(i)];
  raw_[idx(j + 1, j)] = subdiag;
}

double Hessenberg::commit_column(int j) {
  if (j != committed_)
    throw std::invalid_argument("Hessenberg: commit out of order");
  for (int i = 0; i <= j + 1; ++i) r_[idx(i, j)] = raw_[idx(i, j)];
  // Apply the accumulated rotations to the new column.
  for (int i = 0; i < j; ++i) {
    const double t0 = r_[idx(i, j)];
    const double t1 = r_[idx(i + 1, j)];
    r_[idx(i, j)] = cs_[i] * t0 + sn_[i] * t1;
    r_[idx(i + 1, j)] = -sn_[i] * t0 + cs_[i] * t1;
  }
  // Form the rotation that zeroes the subdiagonal.
  const double a = r_[idx(j, j)];
  const double b = r_[idx(j + 1, j)];
  const double d = std::hypot(a, b);
  if (d == 0.0) {
    cs_[j] = 1.0;
    sn_[j] = 0.0;
  } else {
    cs_[j] = a / d;
    sn_[j] = b / d;
  }
  r_[idx(j, j)] = cs_[j] * a + sn_[j] * b;
  r_[idx(j + 1, j)] = 0.0;
  const double gj = g_[static_cast<std::size_t>(j)];
  g_[static_cast<std::size_t>(j)] = cs_[j] * gj;
  g_[static_cast<std::size_t>(j + 1)] = -sn_[j] * gj;
  ++committed_;
  return std::fabs(g_[static_cast<std::size_t>(j + 1)]);
}

double Hessenberg::ls_residual() const {
  return std::fabs(g_[static_cast<std::size_t>(committed_)]);
}

std::vector<double> Hessenberg::solve_y(int k) const {
  if (k < 0 || k > committed_)
    throw std::invalid_argument("Hessenberg: solve_y out of range");
  std::vector<double> y(static_cast<std::size_t>(k), 0.0);
  for (int i = k - 1; i >= 0; --i) {
    double sum = g_[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) sum -= r_[idx(i, j)] * y[static_cast<std::size_t>(j)];
    y[static_cast<std::size_t>(i)] = sum / r_[idx(i, i)];
  }
  return y;
}

std::vector<double> Hessenberg::leading_block(int k) const {
  std::vector<double> block(static_cast<std::size_t>(k) *
                            static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < k; ++i)
      block[static_cast<std::size_t>(i) +
            static_cast<std::size_t>(j) * static_cast<std::size_t>(k)] =
          i <= j + 1 ? raw_[idx(i, j)] : 0.0;
  return block;
}

SingularRange singular_range_jacobi(std::vector<double> a, int m, int n) {
  if (m < n || n < 1)
    throw std::invalid_argument("singular_range_jacobi: need m >= n >= 1");
  const auto col = [&](int j) { return a.data() + static_cast<std::size_t>(j) * m; };

  constexpr int kMaxSweeps = 60;
  constexpr double kTol = 1e-15;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double app = 0.0, aqq = 0.0, apq = 0.0;
        const double* cp = col(p);
        const double* cq = col(q);
        for (int i = 0; i < m; ++i) {
          app += cp[i] * cp[i];
          aqq += cq[i] * cq[i];
          apq += cp[i] * cq[i];
        }
        if (std::fabs(apq) <= kTol * std::sqrt(app * aqq)) continue;
        rotated = true;
        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        double* wp = col(p);
        double* wq = col(q);
        for (int i = 0; i < m; ++i) {
          const double vp = wp[i];
          const double vq = wq[i];
          wp[i] = c * vp - s * vq;
          wq[i] = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }

  SingularRange range;
  range.sigma_min = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    double norm2 = 0.0;
    const double* cj = col(j);
    for (int i = 0; i < m; ++i) norm2 += cj[i] * cj[i];
    const double sigma = std::sqrt(norm2);
    range.sigma_min = std::min(range.sigma_min, sigma);
    range.sigma_max = std::max(range.sigma_max, sigma);
  }
  return range;
}

RankCheckResult rank_check(const Hessenberg& H, int k, double rank_tol) {
  if (k < 1) throw std::invalid_argument("rank_check: k must be >= 1");
  const SingularRange range = singular_range_jacobi(H.leading_block(k), k, k);
  RankCheckResult result;
  result.sigma_min = range.sigma_min;
  result.sigma_max = range.sigma_max;
  result.full_rank = range.sigma_min > rank_tol * range.sigma_max;
  return result;
}

}  // namespace ftk
