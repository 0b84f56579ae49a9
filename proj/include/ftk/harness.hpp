#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ftk/ftgmres.hpp"

namespace ftk::harness {

/// One experiment: a problem, a right-hand side, a solver, and a fault
/// policy. Restarted GMRES runs s iterations per cycle for t cycles;
/// non-restarted GMRES runs s*t iterations; FT-GMRES runs t outer
/// iterations with inner budgets from the schedule.
struct ExperimentSpec {
  enum class Problem { Diagonal, MatrixMarket };
  enum class Rhs { AOnes, SeededUniform };
  enum class Solver { FtGmres, RestartedGmres, Gmres };

  Problem problem = Problem::Diagonal;
  index_t diag_n = 10000;
  double diag_decades = 10.0;
  std::string mm_path;

  Rhs rhs = Rhs::AOnes;
  std::uint64_t rhs_seed = 0;

  Solver solver = Solver::FtGmres;
  int s = 50;
  int t = 10;
  double tol = 0.0;  // 0: run the full iteration budget

  fault::FaultPolicy fault;
  PrecondKind precond = PrecondKind::Identity;

  InnerSchedule schedule = InnerSchedule::Decreasing;
  RefreshMode refresh = RefreshMode::Always;
  RecoveryStrategy recovery = RecoveryStrategy::RetryInner;
  bool inner_vectors_failable = true;
  bool first_solve_guard = true;
  double inner_tol = 0.0;
  int max_retries = 2;
  index_t scrub_window = 2;
};

struct ConvergenceRecord {
  std::string solver;
  int outer = 0;
  long global_iter = 0;
  double resid_rel = 0.0;
  std::uint64_t faults_injected = 0;
  std::uint64_t faults_detected = 0;
};

struct ExperimentResult {
  std::string solver_label;
  SolveReport report;
  std::vector<ConvergenceRecord> records;
  /// Relative true residual of the returned iterate against the pristine
  /// operators.
  double final_residual = 0.0;
  std::string faultlog_csv;  // filled when the spec's policy injects
};

CsrMatrix load_problem(const ExperimentSpec& spec);
DenseVector make_rhs(const ExperimentSpec& spec, const CsrMatrix& A);
const char* solver_label(ExperimentSpec::Solver s);

ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Header plus one line per record:
/// solver,outer,global_iter,resid_rel,faults_injected,faults_detected
void write_csv(std::ostream& out, const std::vector<ConvergenceRecord>& records);

std::string summary(const ExperimentResult& result);

/// Outer-iterations-to-tolerance grid over fault policies. Each fault
/// column comes from a single full-budget FT-GMRES run; counts are the
/// first outer iteration whose residual crossed the tolerance, or -1.
struct IterationTable {
  std::vector<double> tols;
  std::vector<std::string> fault_labels;
  std::vector<std::vector<int>> counts;  // counts[tol][fault]
};
IterationTable run_iteration_table(const ExperimentSpec& base,
                                   const std::vector<double>& tols,
                                   const std::vector<fault::FaultPolicy>& faults,
                                   const std::vector<std::string>& labels);
void print_table(std::ostream& out, const IterationTable& table);

}  // namespace ftk::harness
