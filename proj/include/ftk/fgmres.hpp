#pragma once

#include <functional>

#include "ftk/gmres.hpp"

namespace ftk {

/// Inner operator of a flexible iteration: z = M_j^{-1} q for the 1-based
/// outer iteration j. May differ arbitrarily between iterations; must
/// return a vector of matching length.
using InnerOperator =
    std::function<DenseVector(int j, const DenseVector& q)>;

/// What to do when the outer Hessenberg went rank deficient at column j.
struct RecoveryAction {
  enum class Kind { Stop, Retry };
  Kind kind = Kind::Stop;
  DenseVector z;  // replacement for z_j when Kind::Retry
};

class RecoveryProvider {
 public:
  virtual ~RecoveryProvider() = default;
  /// Called when H(j+1,j) fell below the breakdown tolerance and
  /// H(1:j,1:j) is rank deficient. attempt counts invocations for this
  /// outer iteration, starting at 1. Default: give up.
  virtual RecoveryAction on_rank_deficient(int j, const DenseVector& q,
                                           int attempt) {
    (void)j;
    (void)q;
    (void)attempt;
    return {};
  }
};

struct FlexibleOptions {
  int max_outer = 10;
  /// Relative residual tolerance; 0 disables early stopping.
  double tol = 0.0;
  double breakdown_rel = 1e-12;
  double rank_tol = 1e-12;
  /// Hard cap on recovery retries within one outer iteration.
  int max_recovery_attempts = 8;
  /// Invoked as each outer iteration's residual sample is recorded, so a
  /// caller can stamp fault counters or work counts onto it.
  std::function<void(int j, ResidualSample&)> on_outer_sample;
};

/// Flexible GMRES outer iteration: stores the preconditioned vectors z_j,
/// monitors rank of the leading Hessenberg block when the subdiagonal
/// collapses, and either converges, detects an invariant subspace, or
/// reports rank deficiency (after consulting `recovery`, when given).
/// The convergence label is verified against the true residual at exit.
SolveReport flexible_solve(const CsrMatrix& A, const InnerOperator& inner,
                           const DenseVector& b, const DenseVector& x0,
                           const FlexibleOptions& opts,
                           RecoveryProvider* recovery = nullptr);

/// Plain FGMRES: rank deficiency is reported, never recovered.
SolveReport fgmres(const CsrMatrix& A, const InnerOperator& inner,
                   const DenseVector& b, const DenseVector& x0,
                   const FlexibleOptions& opts);

}  // namespace ftk
