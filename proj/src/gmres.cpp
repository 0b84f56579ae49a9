#include "ftk/gmres.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ftk/hessenberg.hpp"
#include "ftk/kernels.hpp"

namespace ftk {

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Converged:
      return "Converged";
    case Outcome::InvariantSubspace:
      return "InvariantSubspace";
    case Outcome::RankDeficient:
      return "RankDeficient";
    case Outcome::MaxIterations:
      return "MaxIterations";
  }
  return "?";
}

void mgs_orthogonalize(const std::vector<DenseVector>& Q, DenseVector& v,
                       std::span<double> h) {
  for (std::size_t i = 0; i < Q.size(); ++i) {
    h[i] = kernels::dot(Q[i], v);
    kernels::axpy(-h[i], Q[i], v);
  }
}

namespace {

bool all_zero(const DenseVector& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

}  // namespace

SolveReport gmres(const CsrMatrix& A, const Preconditioner& M,
                  const DenseVector& b, const DenseVector& x0,
                  const GmresOptions& opts, SolverHooks* hooks) {
  if (A.nrows != A.ncols) throw std::invalid_argument("gmres: A must be square");
  if (static_cast<index_t>(b.size()) != A.nrows ||
      static_cast<index_t>(x0.size()) != A.nrows || M.dim != A.nrows)
    throw std::invalid_argument("gmres: dimension mismatch");
  if (opts.max_iters < 0) throw std::invalid_argument("gmres: max_iters < 0");

  SolveReport report;
  const double bnorm = kernels::norm2(b);
  if (bnorm == 0.0) {
    report.outcome = Outcome::Converged;
    report.x.assign(b.size(), 0.0);
    report.final_residual = 0.0;
    return report;
  }

  // Initial residual; the SpMV is skipped for a zero initial guess and is
  // not an injection point either way (it belongs to the reliable tier).
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
  if (opts.max_iters == 0) {
    report.x = x0;
    report.final_residual = beta / bnorm;
    return report;
  }

  const double breakdown_tol = opts.breakdown_rel * bnorm;
  std::vector<DenseVector> basis;
  basis.reserve(static_cast<std::size_t>(opts.max_iters) + 1);
  basis.push_back(r);
  kernels::scale(1.0 / beta, basis.back());
  if (hooks) hooks->on_new_basis_vector(basis.back());

  Hessenberg hess(opts.max_iters, beta);
  std::vector<double> h(static_cast<std::size_t>(opts.max_iters) + 1);
  DenseVector z, v;
  bool happy = false;

  for (int j = 0; j < opts.max_iters; ++j) {
    apply_preconditioner(M, basis[static_cast<std::size_t>(j)], z);
    if (hooks) hooks->after_precond(z);
    spmv_into(A, z, v);
    if (hooks) hooks->after_spmv(v);

    mgs_orthogonalize(basis, v, {h.data(), static_cast<std::size_t>(j) + 1});
    const double subdiag = kernels::norm2(v);
    hess.store_column(j, {h.data(), static_cast<std::size_t>(j) + 1}, subdiag);
    const double resid = hess.commit_column(j);
    report.iters = j + 1;
    report.resid_history.push_back({j + 1, j + 1, resid / bnorm, 0, 0});
    if (hooks) hooks->on_iteration(j + 1);

    if (subdiag < breakdown_tol) {
      happy = true;  // invariant subspace; exact solution in the basis
      break;
    }
    basis.push_back(v);
    kernels::scale(1.0 / subdiag, basis.back());
    if (hooks) hooks->on_new_basis_vector(basis.back());

    if (opts.tol > 0.0 && resid / bnorm <= opts.tol) break;
  }

  // x = x0 + M^{-1} (Q y), with a single preconditioner apply at exit.
  const std::vector<double> y = hess.solve_y();
  DenseVector u(b.size(), 0.0);
  for (std::size_t i = 0; i < y.size(); ++i)
    kernels::axpy(y[i], basis[i], u);
  apply_preconditioner(M, u, z);
  if (hooks) hooks->after_precond(z);
  report.x = x0;
  for (std::size_t i = 0; i < report.x.size(); ++i) report.x[i] += z[i];
  if (hooks) hooks->before_workspace_release();

  if (opts.verify_at_exit) {
    DenseVector ax = spmv(A, report.x);
    for (std::size_t i = 0; i < ax.size(); ++i) ax[i] = b[i] - ax[i];
    report.final_residual = kernels::norm2(ax) / bnorm;
    if (opts.tol > 0.0) {
      report.outcome = report.final_residual <= opts.tol
                           ? Outcome::Converged
                           : Outcome::MaxIterations;
    } else {
      report.outcome = happy ? Outcome::Converged : Outcome::MaxIterations;
    }
  } else {
    const double rec = hess.ls_residual() / bnorm;
    report.outcome = (happy || (opts.tol > 0.0 && rec <= opts.tol))
                         ? Outcome::Converged
                         : Outcome::MaxIterations;
  }
  return report;
}

}  // namespace ftk
