#pragma once

#include <span>
#include <vector>

#include "ftk/fault.hpp"
#include "ftk/fgmres.hpp"
#include "ftk/gmres.hpp"
#include "ftk/precond.hpp"

namespace ftk {

enum class InnerSchedule { Decreasing, Constant };
enum class RefreshMode { Always, OnDetection };
enum class RecoveryStrategy { RetryInner, RandomZ, ReturnLastGood };

struct FtConfig {
  int s = 50;  // base inner iteration count
  int t = 10;  // max outer iterations
  /// Decreasing runs max(s - k + 1, 1) inner iterations at outer k, so the
  /// basis storage matches restarted GMRES with cycle length s.
  InnerSchedule schedule = InnerSchedule::Decreasing;
  double outer_tol = 0.0;  // 0: run all t outer iterations
  RecoveryStrategy recovery = RecoveryStrategy::RetryInner;
  RefreshMode refresh = RefreshMode::Always;
  /// Register the inner solver's Krylov basis vectors as failable. They
  /// are corrupted by construction and never checkpointed.
  bool inner_vectors_failable = true;
  bool first_solve_guard = true;
  double inner_tol = 0.0;  // optional inner stopping tolerance; 0 = fixed budget
  int max_retries = 2;     // recovery retries before degrading to ReturnLastGood
  index_t scrub_window = 2;
  double breakdown_rel = 1e-12;
  double rank_tol = 1e-12;
};

/// Replaces every NaN/Inf entry with the windowed mean of its finite
/// neighbors (0 when none); the result is all-finite. Finite vectors pass
/// through unchanged.
DenseVector scrub_vector(DenseVector v, index_t window = 2);

/// One inner-solve sandbox: owns the failable-region bookkeeping for the
/// operator data (matrix values, preconditioner factors) plus, optionally,
/// the inner solver's basis vectors, and implements the solver hooks that
/// drive fault injection. Operator regions are checkpointed at
/// construction. On session destruction everything is unmarked.
class SandboxSession : public SolverHooks {
 public:
  SandboxSession(fault::FaultDomain& domain, std::span<double> matrix_values,
                 std::vector<std::span<double>> precond_arrays,
                 bool inner_vectors_failable);
  ~SandboxSession() override;

  SandboxSession(const SandboxSession&) = delete;
  SandboxSession& operator=(const SandboxSession&) = delete;

  /// Marks operator regions failable; inner-phase hooks become active.
  void begin_inner();
  /// Unmarks operator regions and refreshes them from their checkpoints
  /// (Always) or only when detected faults hit them (OnDetection).
  void end_inner(RefreshMode mode);
  /// Restores any region faults touched since its checkpoint, regardless
  /// of detection. Used once at solve exit so the caller always gets its
  /// operators back bit-identical.
  void final_restore();

  bool regions_clean() const;  // all operator regions unmarked

  // SolverHooks: deterministic pattern consumption applies to SpMV outputs;
  // every SpMV and preconditioner apply advances the logical clock by
  // policy.time_per_op (the Poisson injection points).
  void after_spmv(DenseVector& v) override;
  void after_precond(DenseVector& z) override;
  void on_new_basis_vector(std::span<double> q) override;
  void before_workspace_release() override;

  fault::FaultDomain& domain() { return domain_; }

 private:
  fault::FaultDomain& domain_;
  std::vector<fault::RegionId> operator_regions_;
  std::vector<fault::RegionId> inner_vector_regions_;
  bool inner_vectors_failable_;
  bool inner_active_ = false;
};

/// Inner solve under the sandbox contract: marks the failable regions,
/// runs plain GMRES for `budget` iterations with injection hooks, unmarks
/// and refreshes, and returns the final iterate whether or not the inner
/// solve converged. budget <= 0 returns z = q.
SolveReport sandboxed_inner_solve(SandboxSession& session, const CsrMatrix& A,
                                  const Preconditioner& M,
                                  const DenseVector& q, int budget,
                                  double inner_tol, RefreshMode refresh);

/// ||A^{-1}||_2 estimate from a fault-free Arnoldi probe: reciprocal of
/// the smallest singular value of the projected block. Returns 1 when no
/// estimate is available.
double estimate_inv_norm(const CsrMatrix& A, int probe_steps,
                         std::uint64_t seed);

/// Extra reliability for the first inner solve: accepts `provider`'s
/// candidate z_1 only if it would reduce the outer least-squares residual
/// below beta * (1 - 1e-12); otherwise tries the provider once more, and
/// failing that substitutes the identity operator, z_1 = q_1.
DenseVector first_inner_solve_guard(
    const CsrMatrix& A, const DenseVector& q1,
    const std::function<DenseVector()>& provider);

/// The recovery strategies for a rank-deficient outer Hessenberg:
/// RetryInner redoes the inner solve, RandomZ substitutes a seeded random
/// vector scaled by the ||A^{-1}|| estimate, ReturnLastGood stops with
/// x_{j-1}. Retry strategies degrade to ReturnLastGood after max_retries.
class FtRecovery : public RecoveryProvider {
 public:
  FtRecovery(RecoveryStrategy strategy, int max_retries, std::uint64_t seed,
             double inv_norm_estimate, InnerOperator rerun_inner);
  RecoveryAction on_rank_deficient(int j, const DenseVector& q,
                                   int attempt) override;

 private:
  RecoveryStrategy strategy_;
  int max_retries_;
  fault::Rng rng_;
  double inv_norm_estimate_;
  InnerOperator rerun_inner_;
};

/// Fault-Tolerant GMRES: a reliable flexible outer iteration whose
/// "preconditioner" is an unreliable sandboxed inner GMRES solve. A and M
/// are mutated by injected faults during inner solves and restored before
/// every outer-tier use; at exit they are bit-identical to their
/// checkpoints. The Converged label is validated against the pristine
/// operators for every fault schedule.
SolveReport ft_gmres(CsrMatrix& A, Preconditioner& M, const DenseVector& b,
                     const DenseVector& x0, const FtConfig& cfg,
                     const fault::FaultPolicy& policy);

}  // namespace ftk
