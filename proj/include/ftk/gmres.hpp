#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "ftk/csr.hpp"
#include "ftk/fault.hpp"
#include "ftk/precond.hpp"

namespace ftk {

/// Observation points a fault sandbox (or any instrumentation) can attach
/// to a running solver. Hooks fire in a fixed, deterministic order.
class SolverHooks {
 public:
  virtual ~SolverHooks() = default;
  /// After each matrix apply in the iteration loop.
  virtual void after_spmv(DenseVector&) {}
  /// After each preconditioner apply (including the exit solution update).
  virtual void after_precond(DenseVector&) {}
  /// A new Krylov basis vector was committed; storage stays valid until
  /// before_workspace_release.
  virtual void on_new_basis_vector(std::span<double>) {}
  /// End of one iteration (after the residual update).
  virtual void on_iteration(int iteration) {}
  /// The solver is about to release its workspace.
  virtual void before_workspace_release() {}
};

enum class Outcome { Converged, InvariantSubspace, RankDeficient, MaxIterations };
const char* to_string(Outcome o);

struct ResidualSample {
  int iteration = 0;   // 1-based; outer iteration for flexible solvers
  long global_iter = 0;
  double resid_rel = 0.0;
  std::uint64_t faults_injected = 0;
  std::uint64_t faults_detected = 0;
};

struct SolveReport {
  Outcome outcome = Outcome::MaxIterations;
  DenseVector x;
  std::vector<ResidualSample> resid_history;
  int iters = 0;
  fault::FaultCounters fault_counters;
  /// True relative residual ||b - A x|| / ||b|| when it was computed at
  /// exit; NaN otherwise.
  double final_residual = std::numeric_limits<double>::quiet_NaN();
};

struct GmresOptions {
  int max_iters = 100;
  /// Relative recurrence-residual stopping tolerance; 0 disables the test
  /// and the solver runs its full iteration budget.
  double tol = 0.0;
  double breakdown_rel = 1e-12;  // happy-breakdown threshold, times ||b||
  /// Recompute ||b - A x|| at exit and label Converged only if it passes.
  /// Sandboxed inner solves turn this off; they return their final iterate
  /// regardless.
  bool verify_at_exit = true;
};

/// Right-preconditioned GMRES with modified Gram-Schmidt and Givens
/// least squares. Residual history records the relative recurrence
/// residual per iteration.
SolveReport gmres(const CsrMatrix& A, const Preconditioner& M,
                  const DenseVector& b, const DenseVector& x0,
                  const GmresOptions& opts, SolverHooks* hooks = nullptr);

/// h (size Q.size()) receives projection coefficients; v is orthogonalized
/// against Q in place.
void mgs_orthogonalize(const std::vector<DenseVector>& Q, DenseVector& v,
                       std::span<double> h);

}  // namespace ftk
