#include "ftk/fgmres.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ftk/hessenberg.hpp"
#include "ftk/kernels.hpp"

namespace ftk {

namespace {

bool all_zero(const DenseVector& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

DenseVector combine(const DenseVector& x0, const std::vector<DenseVector>& Z,
                    const std::vector<double>& y) {
  DenseVector x = x0;
  for (std::size_t i = 0; i < y.size(); ++i) kernels::axpy(y[i], Z[i], x);
  return x;
}

double true_residual(const CsrMatrix& A, const DenseVector& b,
                     const DenseVector& x, double bnorm) {
  DenseVector r = spmv(A, x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  return kernels::norm2(r) / bnorm;
}

}  // namespace

SolveReport flexible_solve(const CsrMatrix& A, const InnerOperator& inner,
                           const DenseVector& b, const DenseVector& x0,
                           const FlexibleOptions& opts,
                           RecoveryProvider* recovery) {
  if (A.nrows != A.ncols)
    throw std::invalid_argument("flexible_solve: A must be square");
  if (static_cast<index_t>(b.size()) != A.nrows ||
      static_cast<index_t>(x0.size()) != A.nrows)
    throw std::invalid_argument("flexible_solve: dimension mismatch");
  if (opts.max_outer < 1)
    throw std::invalid_argument("flexible_solve: max_outer must be >= 1");

  SolveReport report;
  const double bnorm = kernels::norm2(b);
  if (bnorm == 0.0) {
    report.outcome = Outcome::Converged;
    report.x.assign(b.size(), 0.0);
    report.final_residual = 0.0;
    return report;
  }
  DenseVector r = b;
  if (!all_zero(x0)) {
    DenseVector ax = spmv(A, x0);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= ax[i];
  }
  const double beta = kernels::norm2(r);
  if (beta == 0.0) {
    report.outcome = Outcome::Converged;
    report.x = x0;
    report.final_residual = 0.0;
    return report;
  }

  const double breakdown_tol = opts.breakdown_rel * bnorm;
  std::vector<DenseVector> basis;   // q_1 .. q_{j+1}
  std::vector<DenseVector> precon;  // z_1 .. z_j
  basis.reserve(static_cast<std::size_t>(opts.max_outer) + 1);
  precon.reserve(static_cast<std::size_t>(opts.max_outer));
  basis.push_back(r);
  kernels::scale(1.0 / beta, basis.back());

  Hessenberg hess(opts.max_outer, beta);
  std::vector<double> h(static_cast<std::size_t>(opts.max_outer) + 1);
  DenseVector v;

  const auto finish = [&](Outcome fallback) {
    const std::vector<double> y = hess.solve_y();
    report.x = combine(x0, precon, y);
    report.iters = hess.committed();
    report.final_residual = true_residual(A, b, report.x, bnorm);
    report.outcome = (opts.tol > 0.0 && report.final_residual <= opts.tol)
                         ? Outcome::Converged
                         : fallback;
    return report;
  };

  // Stored preconditioned vectors are normalized: the search space and the
  // iterates are unchanged (y absorbs the scale), and no finite inner
  // result, however huge, can overflow the outer-tier arithmetic.
  const auto normalize = [](DenseVector& z) {
    const double znorm = kernels::norm2(z);
    if (znorm > 0.0 && std::isfinite(znorm)) kernels::scale(1.0 / znorm, z);
  };

  for (int j = 1; j <= opts.max_outer; ++j) {
    DenseVector z = inner(j, basis.back());
    normalize(z);
    int attempt = 0;
    for (;;) {
      if (static_cast<index_t>(z.size()) != A.nrows)
        throw std::invalid_argument("flexible_solve: inner operator returned wrong length");
      spmv_into(A, z, v);
      mgs_orthogonalize(basis, v, {h.data(), static_cast<std::size_t>(j)});
      const double subdiag = kernels::norm2(v);
      hess.store_column(j - 1, {h.data(), static_cast<std::size_t>(j)}, subdiag);

      if (subdiag < breakdown_tol) {
        const RankCheckResult rank = rank_check(hess, j, opts.rank_tol);
        if (!rank.full_rank) {
          ++attempt;
          RecoveryAction action;
          if (recovery && attempt <= opts.max_recovery_attempts)
            action = recovery->on_rank_deficient(j, basis.back(), attempt);
          if (action.kind == RecoveryAction::Kind::Retry) {
            z = std::move(action.z);
            normalize(z);
            continue;  // redo the iteration with the replacement z_j
          }
          // Stop: x_{j-1}, the last good approximate solution.
          return finish(Outcome::RankDeficient);
        }
        // Invariant subspace discovered: keep column j, return at the end
        // of this iteration.
        const double resid = hess.commit_column(j - 1);
        precon.push_back(std::move(z));
        ResidualSample sample{j, j, resid / bnorm, 0, 0};
        if (opts.on_outer_sample) opts.on_outer_sample(j, sample);
        report.resid_history.push_back(sample);
        return finish(Outcome::InvariantSubspace);
      }

      const double resid = hess.commit_column(j - 1);
      precon.push_back(std::move(z));
      basis.push_back(v);
      kernels::scale(1.0 / subdiag, basis.back());
      ResidualSample sample{j, j, resid / bnorm, 0, 0};
      if (opts.on_outer_sample) opts.on_outer_sample(j, sample);
      report.resid_history.push_back(sample);
      break;
    }

    if (opts.tol > 0.0 && hess.ls_residual() / bnorm <= opts.tol) {
      const std::vector<double> y = hess.solve_y();
      report.x = combine(x0, precon, y);
      report.iters = hess.committed();
      report.final_residual = true_residual(A, b, report.x, bnorm);
      if (report.final_residual <= opts.tol) {
        report.outcome = Outcome::Converged;
        return report;
      }
      // Recurrence drifted from the true residual; keep iterating.
    }
  }
  return finish(Outcome::MaxIterations);
}

SolveReport fgmres(const CsrMatrix& A, const InnerOperator& inner,
                   const DenseVector& b, const DenseVector& x0,
                   const FlexibleOptions& opts) {
  return flexible_solve(A, inner, b, x0, opts, nullptr);
}

}  // namespace ftk
