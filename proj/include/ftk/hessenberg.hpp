#pragma once

#include <span>
#include <vector>

#include "ftk/csr.hpp"

namespace ftk {

/// The projected least-squares problem min || H(1:j+1,1:j) y - beta*e1 ||
/// maintained by Givens rotations. This is "small", always-reliable data.
///
/// Columns go through two steps: store_column writes the raw Arnoldi
/// coefficients (so rank checks can inspect the candidate), and
/// commit_column applies the rotations and counts the column. A stored but
/// uncommitted column leaves the least-squares state untouched, which is
/// what the rank-deficient stop path needs to recover x_{j-1}.
class Hessenberg {
 public:
  Hessenberg(int m_max, double beta);

  /// Raw coefficients for 0-based column j: h holds rows 0..j, subdiag is
  /// H(j+2,j+1) in 1-based terms.
  void store_column(int j, std::span<const double> h, double subdiag);

  /// Rotates column j into the R factor and updates g. Returns the new
  /// least-squares residual |g[j+1]|.
  double commit_column(int j);

  int committed() const { return committed_; }
  double beta() const { return beta_; }
  double ls_residual() const;

  /// Back-substitutes R(1:k,1:k) y = g(1:k) for the first k committed
  /// columns; k defaults to all of them.
  std::vector<double> solve_y() const { return solve_y(committed_); }
  std::vector<double> solve_y(int k) const;

  /// Raw (unrotated) entry H(i,j), 0-based, i <= j+1.
  double raw(int i, int j) const { return raw_[idx(i, j)]; }

  /// Col-major copy of the k-by-k leading block of raw H. Includes stored
  /// but uncommitted columns.
  std::vector<double> leading_block(int k) const;

 private:
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(j) * static_cast<std::size_t>(m_max_ + 1);
  }

  int m_max_;
  int committed_ = 0;
  double beta_;
  std::vector<double> raw_;
  std::vector<double> r_;
  std::vector<double> cs_, sn_, g_;
};

/// Smallest and largest singular values of an m-by-n col-major matrix
/// (m >= n), computed by one-sided Jacobi orthogonalization of columns.
struct SingularRange {
  double sigma_min = 0.0;
  double sigma_max = 0.0;
};
SingularRange singular_range_jacobi(std::vector<double> a, int m, int n);

/// Rank test of the k-by-k leading block of H: full rank iff
/// sigma_min > rank_tol * sigma_max. k counts columns including any stored
/// but uncommitted candidate.
struct RankCheckResult {
  bool full_rank = false;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
};
RankCheckResult rank_check(const Hessenberg& H, int k, double rank_tol = 1e-12);

}  // namespace ftk
