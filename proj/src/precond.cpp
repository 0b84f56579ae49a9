#include "ftk/precond.hpp"

#include <cmath>
#include <stdexcept>

namespace ftk {

namespace {

// Near-zero pivot replacement threshold, relative to max|A|.
constexpr double kPivotRel = 1e-30;

double max_abs_entry(const CsrMatrix& A) {
  double amax = 0.0;
  for (double v : A.values) amax = std::max(amax, std::fabs(v));
  return amax;
}

double substitute_pivot(double pivot, double floor_abs, int& count) {
  if (std::fabs(pivot) >= floor_abs) return pivot;
  ++count;
  return pivot < 0.0 ? -floor_abs : floor_abs;
}

Preconditioner build_jacobi(const CsrMatrix& A) {
  Preconditioner M;
  M.kind = PrecondKind::Jacobi;
  M.dim = A.nrows;
  const double amax = max_abs_entry(A);
  const double floor_abs = kPivotRel * (amax > 0.0 ? amax : 1.0);
  M.jacobi_inv_diag.assign(static_cast<std::size_t>(A.nrows), 0.0);
  for (index_t i = 0; i < A.nrows; ++i) {
    double diag = 0.0;
    for (index_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
      if (A.col_idx[k] == i) {
        diag = A.values[k];
        break;
      }
    }
    M.jacobi_inv_diag[i] =
        1.0 / substitute_pivot(diag, floor_abs, M.substituted_pivots);
  }
  return M;
}

// Zero-fill incomplete LU, row-wise elimination with a scatter workspace.
// L keeps the strictly lower part (unit diagonal implicit); U keeps the
// diagonal plus upper part. The diagonal is always stored in U, even when
// structurally absent from A, so the backward solve has a pivot.
Preconditioner build_ilu0(const CsrMatrix& A) {
  const index_t n = A.nrows;
  Preconditioner M;
  M.kind = PrecondKind::Ilu0;
  M.dim = n;
  const double amax = max_abs_entry(A);
  const double floor_abs = kPivotRel * (amax > 0.0 ? amax : 1.0);

  CsrMatrix& L = M.lower;
  CsrMatrix& U = M.upper;
  L.nrows = L.ncols = n;
  U.nrows = U.ncols = n;
  L.row_ptr.assign(1, 0);
  U.row_ptr.assign(1, 0);

  std::vector<double> work(static_cast<std::size_t>(n), 0.0);
  std::vector<char> in_pattern(static_cast<std::size_t>(n), 0);

  for (index_t i = 0; i < n; ++i) {
    const index_t begin = A.row_ptr[i];
    const index_t end = A.row_ptr[i + 1];
    for (index_t k = begin; k < end; ++k) {
      work[A.col_idx[k]] = A.values[k];
      in_pattern[A.col_idx[k]] = 1;
    }
    // Diagonal slot participates even when A has no entry there.
    const bool diag_in_pattern = in_pattern[i] != 0;
    if (!diag_in_pattern) {
      work[i] = 0.0;
      in_pattern[i] = 1;
    }

    // Eliminate with rows k < i, ascending column order.
    for (index_t k = begin; k < end && A.col_idx[k] < i; ++k) {
      const index_t kc = A.col_idx[k];
      const index_t udiag = U.row_ptr[kc];  // diagonal is first in U's row
      const double factor = work[kc] / U.values[udiag];
      work[kc] = factor;
      for (index_t j = udiag + 1; j < U.row_ptr[kc + 1]; ++j) {
        const index_t jc = U.col_idx[j];
        if (in_pattern[jc]) work[jc] -= factor * U.values[j];
      }
    }

    for (index_t k = begin; k < end && A.col_idx[k] < i; ++k) {
      L.col_idx.push_back(A.col_idx[k]);
      L.values.push_back(work[A.col_idx[k]]);
    }
    L.row_ptr.push_back(static_cast<index_t>(L.col_idx.size()));

    U.col_idx.push_back(i);
    U.values.push_back(
        substitute_pivot(work[i], floor_abs, M.substituted_pivots));
    for (index_t k = begin; k < end; ++k) {
      if (A.col_idx[k] > i) {
        U.col_idx.push_back(A.col_idx[k]);
        U.values.push_back(work[A.col_idx[k]]);
      }
    }
    U.row_ptr.push_back(static_cast<index_t>(U.col_idx.size()));

    for (index_t k = begin; k < end; ++k) {
      work[A.col_idx[k]] = 0.0;
      in_pattern[A.col_idx[k]] = 0;
    }
    work[i] = 0.0;
    in_pattern[i] = 0;
  }
  L.validate();
  U.validate();
  return M;
}

}  // namespace

std::vector<std::span<double>> Preconditioner::failable_arrays() {
  switch (kind) {
    case PrecondKind::Identity:
      return {};
    case PrecondKind::Jacobi:
      return {std::span<double>(jacobi_inv_diag)};
    case PrecondKind::Ilu0:
      return {std::span<double>(lower.values), std::span<double>(upper.values)};
  }
  return {};
}

Preconditioner build_preconditioner(PrecondKind kind, const CsrMatrix& A) {
  if (A.nrows != A.ncols)
    throw std::invalid_argument("build_preconditioner: matrix must be square");
  switch (kind) {
    case PrecondKind::Identity: {
      Preconditioner M;
      M.dim = A.nrows;
      return M;
    }
    case PrecondKind::Jacobi:
      return build_jacobi(A);
    case PrecondKind::Ilu0:
      return build_ilu0(A);
  }
  throw std::invalid_argument("build_preconditioner: unknown kind");
}

void apply_preconditioner(const Preconditioner& M, const DenseVector& q,
                          DenseVector& z) {
  if (static_cast<index_t>(q.size()) != M.dim)
    throw std::invalid_argument("apply_preconditioner: length mismatch");
  switch (M.kind) {
    case PrecondKind::Identity:
      z = q;
      return;
    case PrecondKind::Jacobi:
      z.resize(q.size());
      for (std::size_t i = 0; i < q.size(); ++i)
        z[i] = q[i] * M.jacobi_inv_diag[i];
      return;
    case PrecondKind::Ilu0: {
      const CsrMatrix& L = M.lower;
      const CsrMatrix& U = M.upper;
      z.resize(q.size());
      // Forward solve L w = q, unit diagonal; w stored in z.
      for (index_t i = 0; i < M.dim; ++i) {
        double sum = q[static_cast<std::size_t>(i)];
        for (index_t k = L.row_ptr[i]; k < L.row_ptr[i + 1]; ++k)
          sum -= L.values[k] * z[static_cast<std::size_t>(L.col_idx[k])];
        z[static_cast<std::size_t>(i)] = sum;
      }
      // Backward solve U z = w; the diagonal entry is first in each row.
      for (index_t i = M.dim - 1; i >= 0; --i) {
        double sum = z[static_cast<std::size_t>(i)];
        const index_t udiag = U.row_ptr[i];
        for (index_t k = udiag + 1; k < U.row_ptr[i + 1]; ++k)
          sum -= U.values[k] * z[static_cast<std::size_t>(U.col_idx[k])];
        z[static_cast<std::size_t>(i)] = sum / U.values[udiag];
      }
      return;
    }
  }
}

DenseVector apply_preconditioner(const Preconditioner& M,
                                 const DenseVector& q) {
  DenseVector z;
  apply_preconditioner(M, q, z);
  return z;
}

}  // namespace ftk
