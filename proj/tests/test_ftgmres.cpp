#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "ftk/ftgmres.hpp"
#include "oracles.hpp"

using namespace ftk;
using fault::FaultMode;
using fault::FaultPolicy;

namespace {

FaultPolicy no_faults() { return {}; }

FaultPolicy pattern(std::vector<std::uint8_t> bits) {
  FaultPolicy p;
  p.mode = FaultMode::Deterministic;
  p.pattern = std::move(bits);
  return p;
}

FaultPolicy poisson(double rate, std::uint64_t seed, double time_per_op) {
  FaultPolicy p;
  p.mode = FaultMode::Poisson;
  p.rate = rate;
  p.seed = seed;
  p.time_per_op = time_per_op;
  return p;
}

}  // namespace

TEST_SUITE("ft-gmres") {

TEST_CASE("scrub repairs invalid entries from neighbors") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(scrub_vector({1.0, nan, 3.0}, 1) == DenseVector{1.0, 2.0, 3.0});
  CHECK(scrub_vector({inf, inf, inf}, 1) == DenseVector{0.0, 0.0, 0.0});
}

TEST_CASE("scrub passes finite vectors through bitwise") {
  std::mt19937_64 rng(139);
  const DenseVector v = oracle::random_vector(rng, 64);
  CHECK(scrub_vector(v, 2) == v);
}

TEST_CASE("scrub repairs from the original values, not in-place results") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  // With in-place repair, index 2 would see the repaired value at index 1.
  const DenseVector out = scrub_vector({4.0, nan, nan, 8.0}, 1);
  CHECK(out[1] == 4.0);
  CHECK(out[2] == 8.0);
}

TEST_CASE("a zero inner budget falls back to the identity") {
  CsrMatrix A = gen_log_diagonal(16, 2.0);
  Preconditioner M = build_preconditioner(PrecondKind::Identity, A);
  fault::FaultDomain domain(no_faults());
  SandboxSession session(domain, std::span<double>(A.values),
                         M.failable_arrays(), true);
  std::mt19937_64 rng(149);
  const DenseVector q = oracle::random_vector(rng, 16);
  const SolveReport r =
      sandboxed_inner_solve(session, A, M, q, 0, 0.0, RefreshMode::Always);
  CHECK(r.x == q);
}

TEST_CASE("with no faults ft-gmres reproduces fgmres bitwise") {
  CsrMatrix A = gen_log_diagonal(60, 3.0);
  Preconditioner M = build_preconditioner(PrecondKind::Identity, A);
  std::mt19937_64 rng(151);
  const DenseVector b = spmv(A, DenseVector(60, 1.0));
  const DenseVector x0(60, 0.0);

  FtConfig cfg;
  cfg.s = 6;
  cfg.t = 5;
  cfg.outer_tol = 0.0;
  const SolveReport ft = ft_gmres(A, M, b, x0, cfg, no_faults());

  // Reference: plain FGMRES whose inner operator is the same fixed-budget
  // GMRES solve on the same (pristine) operators.
  const InnerOperator inner = [&](int j, const DenseVector& q) {
    GmresOptions o;
    o.max_iters = std::max(cfg.s - j + 1, 1);
    o.tol = 0.0;
    o.verify_at_exit = false;
    return gmres(A, M, q, DenseVector(60, 0.0), o).x;
  };
  FlexibleOptions fo;
  fo.max_outer = cfg.t;
  fo.tol = 0.0;
  const SolveReport flex = fgmres(A, inner, b, x0, fo);

  REQUIRE(ft.resid_history.size() == flex.resid_history.size());
  for (std::size_t i = 0; i < ft.resid_history.size(); ++i)
    CHECK(ft.resid_history[i].resid_rel == flex.resid_history[i].resid_rel);
  CHECK(ft.x == flex.x);
  CHECK(ft.fault_counters.injected == 0);
}

TEST_CASE("sandbox hygiene: operators come back bit-identical") {
  std::mt19937_64 rng(211);
  CsrMatrix A = oracle::random_sparse(rng, 128, 0.05);
  Preconditioner M = build_preconditioner(PrecondKind::Jacobi, A);
  const std::vector<double> a_snapshot = A.values;
  const DenseVector m_snapshot = M.jacobi_inv_diag;
  const DenseVector b = spmv(A, DenseVector(128, 1.0));

  FtConfig cfg;
  cfg.s = 10;
  cfg.t = 6;
  for (RefreshMode mode : {RefreshMode::Always, RefreshMode::OnDetection}) {
    cfg.refresh = mode;
    const SolveReport r = ft_gmres(A, M, b, DenseVector(128, 0.0), cfg,
                                   poisson(2e4, 77, 10.0));
    CHECK(r.fault_counters.injected > 0);
    CHECK(A.values == a_snapshot);
    CHECK(M.jacobi_inv_diag == m_snapshot);
  }
}

TEST_CASE("outer residuals stay monotone under an all-faulty pattern") {
  CsrMatrix A = gen_log_diagonal(20, 2.0);
  Preconditioner M = build_preconditioner(PrecondKind::Identity, A);
  const DenseVector b = spmv(A, DenseVector(20, 1.0));
  FtConfig cfg;
  cfg.s = 5;
  cfg.t = 8;
  const SolveReport r =
      ft_gmres(A, M, b, DenseVector(20, 0.0), cfg, pattern({1}));
  CHECK(r.fault_counters.injected > 0);
  REQUIRE(!r.resid_history.empty());
  for (std::size_t i = 1; i < r.resid_history.size(); ++i)
    CHECK(r.resid_history[i].resid_rel <=
          r.resid_history[i - 1].resid_rel * (1.0 + 1e-14));
}

TEST_CASE("converged means the pristine-operator residual passed") {
  CsrMatrix A = gen_log_diagonal(64, 2.0);
  Preconditioner M = build_preconditioner(PrecondKind::Identity, A);
  const DenseVector b = spmv(A, DenseVector(64, 1.0));
  FtConfig cfg;
  cfg.s = 16;
  cfg.t = 8;
  cfg.outer_tol = 1e-8;
  const SolveReport r = ft_gmres(A, M, b, DenseVector(64, 0.0), cfg,
                                 pattern({0, 0, 1}));
  if (r.outcome == Outcome::Converged) {
    CHECK(r.final_residual <= cfg.outer_tol);
  }
  CHECK(r.final_residual == r.final_residual);  // computed, not NaN
}

TEST_CASE("first-solve guard accepts a reducing candidate immediately") {
  CsrMatrix A = gen_log_diagonal(12, 1.0);
  std::mt19937_64 rng(157);
  DenseVector q1 = oracle::random_vector(rng, 12);
  const double n = std::sqrt(oracle::to_eigen(q1).squaredNorm());
  for (double& v : q1) v /= n;

  int calls = 0;
  const auto provider = [&] {
    ++calls;
    return apply_preconditioner(
        build_preconditioner(PrecondKind::Jacobi, A), q1);  // exact inverse
  };
  const DenseVector z = first_inner_solve_guard(A, q1, provider);
  CHECK(calls == 1);
  CHECK(oracle::rel_err(spmv(A, z), q1) < 1e-12);
}

TEST_CASE("first-solve guard retries once, then falls back to the identity") {
  CsrMatrix A = gen_log_diagonal(12, 1.0);
  std::mt19937_64 rng(163);
  DenseVector q1 = oracle::random_vector(rng, 12);
  const double n = std::sqrt(oracle::to_eigen(q1).squaredNorm());
  for (double& v : q1) v /= n;

  int calls = 0;
  const auto garbage = [&] {
    ++calls;
    return DenseVector(12, 0.0);  // zero vector never reduces
  };
  CHECK(first_inner_solve_guard(A, q1, garbage) == q1);
  CHECK(calls == 2);

  calls = 0;
  const auto flaky = [&]() -> DenseVector {
    ++calls;
    if (calls == 1) return DenseVector(12, 0.0);
    return apply_preconditioner(build_preconditioner(PrecondKind::Jacobi, A),
                                q1);
  };
  const DenseVector z = first_inner_solve_guard(A, q1, flaky);
  CHECK(calls == 2);
  CHECK(oracle::rel_err(spmv(A, z), q1) < 1e-12);
}

TEST_CASE("inv-norm estimate is exact on diagonal matrices") {
  // 10 Arnoldi steps resolve a 6-dimensional spectrum exactly.
  CsrMatrix A = gen_log_diagonal(6, 1.0);
  const double est = estimate_inv_norm(A, 10, 17);
  CHECK(est == doctest::Approx(10.0).epsilon(1e-8));
}

TEST_CASE("deterministic ft runs are reproducible") {
  CsrMatrix A = gen_log_diagonal(40, 3.0);
  Preconditioner M = build_preconditioner(PrecondKind::Identity, A);
  const DenseVector b = spmv(A, DenseVector(40, 1.0));
  FtConfig cfg;
  cfg.s = 8;
  cfg.t = 5;
  const FaultPolicy p = poisson(1e4, 2024, 20.0);
  const SolveReport r1 = ft_gmres(A, M, b, DenseVector(40, 0.0), cfg, p);
  const SolveReport r2 = ft_gmres(A, M, b, DenseVector(40, 0.0), cfg, p);
  CHECK(r1.x == r2.x);
  CHECK(r1.fault_counters.injected == r2.fault_counters.injected);
  REQUIRE(r1.resid_history.size() == r2.resid_history.size());
  for (std::size_t i = 0; i < r1.resid_history.size(); ++i)
    CHECK(r1.resid_history[i].resid_rel == r2.resid_history[i].resid_rel);
}

}  // TEST_SUITE
