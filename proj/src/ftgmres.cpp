#include "ftk/ftgmres.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "ftk/hessenberg.hpp"
#include "ftk/kernels.hpp"

namespace ftk {

DenseVector scrub_vector(DenseVector v, index_t window) {
  // Two phases so every repair reads the original values.
  std::vector<std::pair<std::size_t, double>> repairs;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i]))
      repairs.emplace_back(
          i, fault::repair_neighbor_average(v, static_cast<index_t>(i), window));
  }
  for (const auto& [i, value] : repairs) v[i] = value;
  return v;
}

SandboxSession::SandboxSession(fault::FaultDomain& domain,
                               std::span<double> matrix_values,
                               std::vector<std::span<double>> precond_arrays,
                               bool inner_vectors_failable)
    : domain_(domain), inner_vectors_failable_(inner_vectors_failable) {
  operator_regions_.push_back(domain_.register_region(matrix_values));
  for (auto arr : precond_arrays)
    operator_regions_.push_back(domain_.register_region(arr));
  for (fault::RegionId id : operator_regions_) domain_.checkpoint(id);
}

SandboxSession::~SandboxSession() {
  for (fault::RegionId id : inner_vector_regions_)
    domain_.unregister_region(id);
  for (fault::RegionId id : operator_regions_) {
    domain_.unmark_failable(id);
    domain_.unregister_region(id);
  }
}

void SandboxSession::begin_inner() {
  for (fault::RegionId id : operator_regions_) domain_.mark_failable(id);
  inner_active_ = true;
}

void SandboxSession::end_inner(RefreshMode mode) {
  inner_active_ = false;
  for (fault::RegionId id : operator_regions_) {
    domain_.unmark_failable(id);
    if (mode == RefreshMode::Always) {
      domain_.restore(id);
    } else {
      domain_.restore_if_detected(id);
    }
  }
  // Inner basis regions are released by before_workspace_release; nothing
  // of theirs survives the inner solve.
}

void SandboxSession::final_restore() {
  for (fault::RegionId id : operator_regions_) {
    domain_.unmark_failable(id);
    domain_.restore_if_faulted(id);
  }
}

bool SandboxSession::regions_clean() const {
  for (fault::RegionId id : operator_regions_)
    if (domain_.is_failable(id)) return false;
  return true;
}

void SandboxSession::after_spmv(DenseVector& v) {
  if (!inner_active_) return;
  if (domain_.policy().mode == fault::FaultMode::Deterministic)
    domain_.apply_deterministic_fault(v);
  domain_.advance_clock(domain_.policy().time_per_op);
}

void SandboxSession::after_precond(DenseVector&) {
  if (!inner_active_) return;
  domain_.advance_clock(domain_.policy().time_per_op);
}

void SandboxSession::on_new_basis_vector(std::span<double> q) {
  if (!inner_active_ || !inner_vectors_failable_) return;
  const fault::RegionId id = domain_.register_region(q);
  domain_.mark_failable(id);
  inner_vector_regions_.push_back(id);
}

void SandboxSession::before_workspace_release() {
  for (fault::RegionId id : inner_vector_regions_)
    domain_.unregister_region(id);
  inner_vector_regions_.clear();
}

SolveReport sandboxed_inner_solve(SandboxSession& session, const CsrMatrix& A,
                                  const Preconditioner& M,
                                  const DenseVector& q, int budget,
                                  double inner_tol, RefreshMode refresh) {
  if (budget <= 0) {
    // The sandbox must still return something usable; identity is the
    // least harmful choice.
    SolveReport r;
    r.x = q;
    return r;
  }
  session.begin_inner();
  GmresOptions opts;
  opts.max_iters = budget;
  opts.tol = inner_tol;
  opts.verify_at_exit = false;
  DenseVector x0(q.size(), 0.0);
  SolveReport r = gmres(A, M, q, x0, opts, &session);
  session.end_inner(refresh);
  return r;
}

double estimate_inv_norm(const CsrMatrix& A, int probe_steps,
                         std::uint64_t seed) {
  const index_t n = A.nrows;
  const int m = static_cast<int>(std::min<index_t>(probe_steps, n));
  if (m < 1) return 1.0;

  fault::Rng rng(seed);
  DenseVector v(static_cast<std::size_t>(n));
  for (double& x : v) x = 2.0 * rng.uniform01() - 1.0;
  const double vnorm = kernels::norm2(v);
  if (vnorm == 0.0) return 1.0;
  kernels::scale(1.0 / vnorm, v);

  std::vector<DenseVector> basis{v};
  Hessenberg hess(m, 1.0);
  std::vector<double> h(static_cast<std::size_t>(m) + 1);
  DenseVector w;
  int steps = 0;
  for (int j = 0; j < m; ++j) {
    spmv_into(A, basis.back(), w);
    mgs_orthogonalize(basis, w, {h.data(), static_cast<std::size_t>(j) + 1});
    const double subdiag = kernels::norm2(w);
    hess.store_column(j, {h.data(), static_cast<std::size_t>(j) + 1}, subdiag);
    hess.commit_column(j);
    steps = j + 1;
    if (subdiag == 0.0) break;
    basis.push_back(w);
    kernels::scale(1.0 / subdiag, basis.back());
  }
  const SingularRange range =
      singular_range_jacobi(hess.leading_block(steps), steps, steps);
  if (!(range.sigma_min > 0.0) || !std::isfinite(range.sigma_min)) return 1.0;
  return 1.0 / range.sigma_min;
}

namespace {

// Whether a candidate z_1 reduces the one-column outer least-squares
// residual at all: min_y ||beta*e1 - y*(h1,h2)||_2 = beta*|h2|/hypot(h1,h2).
bool reduces_first_residual(const CsrMatrix& A, const DenseVector& q1,
                            const DenseVector& z) {
  DenseVector v = spmv(A, z);
  const double h1 = kernels::dot(q1, v);
  kernels::axpy(-h1, q1, v);
  const double h2 = kernels::norm2(v);
  const double denom = std::hypot(h1, h2);
  if (denom == 0.0) return false;
  return h2 / denom < 1.0 - 1e-12;
}

}  // namespace

DenseVector first_inner_solve_guard(
    const CsrMatrix& A, const DenseVector& q1,
    const std::function<DenseVector()>& provider) {
  DenseVector z = provider();
  if (reduces_first_residual(A, q1, z)) return z;
  z = provider();  // try once more
  if (reduces_first_residual(A, q1, z)) return z;
  return q1;  // identity operator
}

FtRecovery::FtRecovery(RecoveryStrategy strategy, int max_retries,
                       std::uint64_t seed, double inv_norm_estimate,
                       InnerOperator rerun_inner)
    : strategy_(strategy),
      max_retries_(max_retries),
      rng_(seed),
      inv_norm_estimate_(inv_norm_estimate),
      rerun_inner_(std::move(rerun_inner)) {}

RecoveryAction FtRecovery::on_rank_deficient(int j, const DenseVector& q,
                                             int attempt) {
  if (strategy_ == RecoveryStrategy::ReturnLastGood || attempt > max_retries_)
    return {};  // stop: x_{j-1}
  RecoveryAction action;
  action.kind = RecoveryAction::Kind::Retry;
  if (strategy_ == RecoveryStrategy::RetryInner) {
    action.z = rerun_inner_(j, q);
  } else {  // RandomZ
    DenseVector z(q.size());
    for (double& x : z) x = 2.0 * rng_.uniform01() - 1.0;
    const double znorm = kernels::norm2(z);
    const double scale =
        (znorm > 0.0 ? 1.0 / znorm : 1.0) * inv_norm_estimate_;
    kernels::scale(scale, z);
    action.z = std::move(z);
  }
  return action;
}

SolveReport ft_gmres(CsrMatrix& A, Preconditioner& M, const DenseVector& b,
                     const DenseVector& x0, const FtConfig& cfg,
                     const fault::FaultPolicy& policy) {
  if (A.nrows != A.ncols)
    throw std::invalid_argument("ft_gmres: A must be square");
  if (cfg.t < 1) throw std::invalid_argument("ft_gmres: t must be >= 1");

  fault::FaultDomain domain(policy);
  SandboxSession session(domain, std::span<double>(A.values),
                         M.failable_arrays(), cfg.inner_vectors_failable);

  // ||A^{-1}|| estimate for RandomZ scaling, probed on the pristine matrix.
  const double inv_norm_est =
      cfg.recovery == RecoveryStrategy::RandomZ
          ? estimate_inv_norm(A, 10, policy.seed ^ 0xa5a5a5a5a5a5a5a5ULL)
          : 1.0;

  long inner_iters_done = 0;
  const auto budget_for = [&cfg](int k) {
    return cfg.schedule == InnerSchedule::Decreasing
               ? std::max(cfg.s - k + 1, 1)
               : cfg.s;
  };
  const auto run_inner = [&](int j, const DenseVector& q) {
    SolveReport r = sandboxed_inner_solve(session, A, M, q, budget_for(j),
                                          cfg.inner_tol, cfg.refresh);
    inner_iters_done += r.iters;
    return scrub_vector(std::move(r.x), cfg.scrub_window);
  };

  const double bnorm = kernels::norm2(b);

  const InnerOperator inner = [&](int j, const DenseVector& q) {
    if (j == 1 && cfg.first_solve_guard)
      return first_inner_solve_guard(A, q, [&] { return run_inner(j, q); });
    return run_inner(j, q);
  };

  FtRecovery recovery(cfg.recovery, cfg.max_retries,
                      policy.seed ^ 0x5bd1e995cafef00dULL, inv_norm_est,
                      run_inner);

  FlexibleOptions opts;
  opts.max_outer = cfg.t;
  opts.tol = cfg.outer_tol;
  opts.breakdown_rel = cfg.breakdown_rel;
  opts.rank_tol = cfg.rank_tol;
  opts.max_recovery_attempts = cfg.max_retries + 1;
  opts.on_outer_sample = [&](int, ResidualSample& sample) {
    sample.global_iter = inner_iters_done;
    const fault::FaultCounters c = domain.counters();
    sample.faults_injected = c.injected;
    sample.faults_detected = c.detected;
  };

  SolveReport report = flexible_solve(A, inner, b, x0, opts, &recovery);

  // Leave the operators bit-identical to their checkpoints no matter what
  // the refresh mode was, then validate the outcome against pristine data.
  session.final_restore();
  if (!session.regions_clean())
    throw std::logic_error("ft_gmres: sandbox left a region marked failable");
  if (bnorm > 0.0 && !report.x.empty()) {
    DenseVector r = spmv(A, report.x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    report.final_residual = kernels::norm2(r) / bnorm;
    const bool verified =
        report.final_residual == 0.0 ||
        (cfg.outer_tol > 0.0 && report.final_residual <= cfg.outer_tol);
    if (report.outcome == Outcome::Converged && !verified)
      report.outcome = Outcome::MaxIterations;
  }
  report.fault_counters = domain.counters();
  return report;
}

}  // namespace ftk
