#pragma once

#include <span>
#include <vector>

#include "ftk/csr.hpp"

namespace ftk {

enum class PrecondKind { Identity, Jacobi, Ilu0 };

/// Right preconditioner. Jacobi stores the reciprocal diagonal; Ilu0 stores
/// the zero-fill incomplete factors with L strictly lower (unit diagonal
/// implicit) and U carrying diagonal plus upper part. Factors are immutable
/// after build except through the fault engine's region mechanism.
struct Preconditioner {
  PrecondKind kind = PrecondKind::Identity;
  index_t dim = 0;
  DenseVector jacobi_inv_diag;
  CsrMatrix lower;
  CsrMatrix upper;
  // Structurally missing or near-zero pivots replaced during build.
  int substituted_pivots = 0;

  /// Floating-point storage subject to the failable/checkpoint contract.
  std::vector<std::span<double>> failable_arrays();
};

/// Builds a preconditioner for square A. Zero or near-zero pivots
/// (|u_ii| < 1e-30 * max|A|) are replaced by sign(u_ii) * 1e-30 * max|A|
/// and counted in substituted_pivots; build never fails on them.
Preconditioner build_preconditioner(PrecondKind kind, const CsrMatrix& A);

/// z = M^{-1} q. Identity copies, Jacobi scales by the reciprocal diagonal,
/// Ilu0 does a forward then a backward triangular solve.
void apply_preconditioner(const Preconditioner& M, const DenseVector& q,
                          DenseVector& z);
DenseVector apply_preconditioner(const Preconditioner& M,
                                 const DenseVector& q);

}  // namespace ftk
