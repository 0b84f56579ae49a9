#include <doctest.h>

#include <sstream>

#include "ftk/harness.hpp"
#include "oracles.hpp"

using namespace ftk;
using harness::ExperimentSpec;

namespace {

ExperimentSpec small_spec(ExperimentSpec::Solver solver) {
  ExperimentSpec spec;
  spec.problem = ExperimentSpec::Problem::Diagonal;
  spec.diag_n = 64;
  spec.diag_decades = 3.0;
  spec.solver = solver;
  spec.s = 6;
  spec.t = 4;
  spec.tol = 0.0;
  return spec;
}

fault::FaultPolicy one_and_three() {
  fault::FaultPolicy p;
  p.mode = fault::FaultMode::Deterministic;
  p.pattern = {1, 0, 1, 0, 0, 0, 0, 0, 0, 0};
  return p;
}

std::string csv_of(const harness::ExperimentResult& r) {
  std::ostringstream out;
  harness::write_csv(out, r.records);
  return out.str();
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("csv output is byte-identical across repeated runs") {
  ExperimentSpec spec = small_spec(ExperimentSpec::Solver::FtGmres);
  spec.fault = one_and_three();
  const std::string a = csv_of(harness::run_experiment(spec));
  const std::string b = csv_of(harness::run_experiment(spec));
  CHECK(a == b);
  CHECK(a.rfind("solver,outer,global_iter,resid_rel,faults_injected,"
                "faults_detected\n",
                0) == 0);
}

TEST_CASE("ft-gmres emits one record per outer iteration") {
  ExperimentSpec spec = small_spec(ExperimentSpec::Solver::FtGmres);
  spec.fault = one_and_three();
  const harness::ExperimentResult r = harness::run_experiment(spec);
  CHECK(r.records.size() == static_cast<std::size_t>(spec.t));
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    CHECK(r.records[i].solver == "ftgmres");
    CHECK(r.records[i].outer == static_cast<int>(i) + 1);
  }
}

TEST_CASE("plain gmres runs s*t iterations, restarted runs s per cycle") {
  ExperimentSpec plain = small_spec(ExperimentSpec::Solver::Gmres);
  const harness::ExperimentResult rp = harness::run_experiment(plain);
  CHECK(rp.records.size() == static_cast<std::size_t>(plain.s * plain.t));

  ExperimentSpec restarted = small_spec(ExperimentSpec::Solver::RestartedGmres);
  const harness::ExperimentResult rr = harness::run_experiment(restarted);
  // s iterations per cycle plus one boundary record per cycle.
  CHECK(rr.records.size() ==
        static_cast<std::size_t>(restarted.s * restarted.t + restarted.t));
  int boundaries = 0;
  for (const auto& rec : rr.records)
    if (rec.global_iter % restarted.s == 0) ++boundaries;
  CHECK(boundaries >= restarted.t);
}

TEST_CASE("paired solvers consume identical fault schedules") {
  ExperimentSpec plain = small_spec(ExperimentSpec::Solver::Gmres);
  plain.fault = one_and_three();
  ExperimentSpec restarted = small_spec(ExperimentSpec::Solver::RestartedGmres);
  restarted.fault = one_and_three();
  const harness::ExperimentResult rp = harness::run_experiment(plain);
  const harness::ExperimentResult rr = harness::run_experiment(restarted);
  // Same number of unreliable SpMVs, same cyclic pattern: same fault count.
  CHECK(rp.report.fault_counters.injected ==
        rr.report.fault_counters.injected);
  std::uint64_t expected = 0;
  const auto& bits = plain.fault.pattern;
  for (int op = 0; op < plain.s * plain.t; ++op)
    if (bits[static_cast<std::size_t>(op) % bits.size()]) ++expected;
  CHECK(rp.report.fault_counters.injected == expected);
}

TEST_CASE("aones right-hand side is the matrix times ones") {
  ExperimentSpec spec = small_spec(ExperimentSpec::Solver::Gmres);
  const CsrMatrix A = harness::load_problem(spec);
  const DenseVector b = harness::make_rhs(spec, A);
  CHECK(b == spmv(A, DenseVector(static_cast<std::size_t>(A.ncols), 1.0)));
}

TEST_CASE("uniform right-hand side is seeded and bounded") {
  ExperimentSpec spec = small_spec(ExperimentSpec::Solver::Gmres);
  spec.rhs = ExperimentSpec::Rhs::SeededUniform;
  spec.rhs_seed = 99;
  const CsrMatrix A = harness::load_problem(spec);
  const DenseVector b1 = harness::make_rhs(spec, A);
  const DenseVector b2 = harness::make_rhs(spec, A);
  CHECK(b1 == b2);
  for (double v : b1) {
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("solver iteration budgets respect the comparison design") {
  // Jacobi is exact on a diagonal problem, so the solve converges well
  // inside the s*t budget and the outcome is validated.
  ExperimentSpec plain = small_spec(ExperimentSpec::Solver::Gmres);
  plain.tol = 1e-13;
  plain.precond = PrecondKind::Jacobi;
  const harness::ExperimentResult r = harness::run_experiment(plain);
  CHECK(r.report.iters <= plain.s * plain.t);
  CHECK(r.report.outcome == Outcome::Converged);
}

TEST_CASE("iteration table reports crossings per fault policy") {
  ExperimentSpec base = small_spec(ExperimentSpec::Solver::FtGmres);
  base.s = 8;
  base.t = 6;
  const std::vector<double> tols{1e-1, 1e-6};
  std::vector<fault::FaultPolicy> faults{fault::FaultPolicy{}, one_and_three()};
  const harness::IterationTable table = harness::run_iteration_table(
      base, tols, faults, {"none", "pattern:1,0,1,..."});
  REQUIRE(table.counts.size() == 2);
  REQUIRE(table.counts[0].size() == 2);
  // The loose tolerance is reached no later than the tight one.
  for (std::size_t f = 0; f < faults.size(); ++f) {
    if (table.counts[1][f] > 0) {
      REQUIRE(table.counts[0][f] > 0);
      CHECK(table.counts[0][f] <= table.counts[1][f]);
    }
  }
  // The no-fault column converges at least as fast as the faulty one.
  if (table.counts[1][0] > 0 && table.counts[1][1] > 0)
    CHECK(table.counts[1][0] <= table.counts[1][1]);
}

}  // TEST_SUITE
