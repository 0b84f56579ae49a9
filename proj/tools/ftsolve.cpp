// Experiment driver: runs FT-GMRES, restarted GMRES, or plain GMRES on a
// generated or Matrix Market problem under a configurable fault policy,
// and writes machine-readable convergence records.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ftk/harness.hpp"
#include "ftk/kernels.hpp"

namespace {

using ftk::harness::ExperimentSpec;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

void parse_problem(const std::string& arg, ExperimentSpec& spec) {
  const auto parts = split(arg, ':');
  if (parts.size() == 3 && parts[0] == "diag") {
    spec.problem = ExperimentSpec::Problem::Diagonal;
    spec.diag_n = std::stoll(parts[1]);
    spec.diag_decades = std::stod(parts[2]);
    return;
  }
  if (parts.size() >= 2 && parts[0] == "mm") {
    spec.problem = ExperimentSpec::Problem::MatrixMarket;
    spec.mm_path = arg.substr(3);  // keep any ':' in the path
    return;
  }
  throw CLI::ValidationError("--problem", "expected diag:N:DECADES or mm:PATH");
}

void parse_rhs(const std::string& arg, ExperimentSpec& spec) {
  const auto parts = split(arg, ':');
  if (parts.size() == 1 && parts[0] == "aones") {
    spec.rhs = ExperimentSpec::Rhs::AOnes;
    return;
  }
  if (parts.size() == 2 && parts[0] == "uniform") {
    spec.rhs = ExperimentSpec::Rhs::SeededUniform;
    spec.rhs_seed = std::stoull(parts[1]);
    return;
  }
  throw CLI::ValidationError("--rhs", "expected aones or uniform:SEED");
}

ftk::fault::FaultPolicy parse_fault(const std::string& arg) {
  ftk::fault::FaultPolicy policy;
  if (arg == "none") return policy;
  const auto parts = split(arg, ':');
  if (parts.size() == 2 && parts[0] == "pattern") {
    policy.mode = ftk::fault::FaultMode::Deterministic;
    for (const std::string& bit : split(parts[1], ',')) {
      if (bit != "0" && bit != "1")
        throw CLI::ValidationError("--fault", "pattern bits must be 0 or 1");
      policy.pattern.push_back(bit == "1" ? 1 : 0);
    }
    if (policy.pattern.empty())
      throw CLI::ValidationError("--fault", "empty pattern");
    return policy;
  }
  if (parts.size() == 3 && parts[0] == "poisson") {
    policy.mode = ftk::fault::FaultMode::Poisson;
    policy.rate = std::stod(parts[1]);
    policy.seed = std::stoull(parts[2]);
    return policy;
  }
  throw CLI::ValidationError(
      "--fault", "expected none, pattern:0,0,1 or poisson:RATE:SEED");
}

struct CommonArgs {
  std::string problem = "diag:10000:10";
  std::string rhs = "aones";
  std::string solver = "ftgmres";
  std::string fault = "none";
  std::string precond = "none";
  std::string refresh = "always";
  std::string recovery = "retry";
  std::string schedule = "decreasing";
  std::string kernels = "auto";
  std::string out_path;
  std::string faultlog_path;
  ExperimentSpec spec;
  std::uint64_t fault_seed = 0;
  bool fault_seed_set = false;

  void register_options(CLI::App* app) {
    app->add_option("--problem", problem, "diag:N:DECADES or mm:PATH");
    app->add_option("--rhs", rhs, "aones or uniform:SEED");
    app->add_option("--s", spec.s, "inner iterations / restart length");
    app->add_option("--t", spec.t, "outer iterations / restart cycles");
    app->add_option("--tol", spec.tol,
                    "relative residual tolerance (0: fixed budget)");
    app->add_option("--fault", fault, "none, pattern:0,0,1 or poisson:RATE:SEED");
    app->add_option("--pdetect", spec.fault.p_detect,
                    "detection probability for injected faults");
    app->add_option("--time-per-op", spec.fault.time_per_op,
                    "simulated seconds per SpMV/preconditioner apply");
    auto* fs = app->add_option("--fault-seed", fault_seed,
                               "seed for pattern-mode detection draws");
    fs->each([this](const std::string&) { fault_seed_set = true; });
    app->add_option("--precond", precond, "none, jacobi or ilu0");
    app->add_option("--refresh", refresh, "always or ondetect");
    app->add_option("--recovery", recovery, "retry, randomz or lastgood");
    app->add_option("--schedule", schedule, "decreasing or constant");
    app->add_flag("--guard,!--no-guard", spec.first_solve_guard,
                  "first-inner-solve guard");
    app->add_flag("--inner-vectors-failable,!--no-inner-vectors-failable",
                  spec.inner_vectors_failable,
                  "allow faults in inner Krylov basis vectors");
    app->add_option("--inner-tol", spec.inner_tol,
                    "optional inner solve tolerance (0: fixed budget)");
    app->add_option("--max-retries", spec.max_retries,
                    "recovery retries before returning the last good iterate");
    app->add_option("--window", spec.scrub_window,
                    "neighbor-average repair window");
    app->add_option("--kernels", kernels, "auto, scalar or avx2");
    app->add_option("--out", out_path, "write convergence records CSV here");
    app->add_option("--faultlog", faultlog_path, "write fault event CSV here");
  }

  ExperimentSpec finish() {
    if (!ftk::kernels::select_backend(kernels))
      throw CLI::ValidationError("--kernels", "unknown or unsupported backend");
    parse_problem(problem, spec);
    parse_rhs(rhs, spec);
    const double p_detect = spec.fault.p_detect;
    const double time_per_op = spec.fault.time_per_op;
    spec.fault = parse_fault(fault);
    spec.fault.p_detect = p_detect;
    spec.fault.time_per_op = time_per_op;
    if (fault_seed_set) spec.fault.seed = fault_seed;

    if (solver == "ftgmres")
      spec.solver = ExperimentSpec::Solver::FtGmres;
    else if (solver == "rgmres")
      spec.solver = ExperimentSpec::Solver::RestartedGmres;
    else if (solver == "gmres")
      spec.solver = ExperimentSpec::Solver::Gmres;
    else
      throw CLI::ValidationError("--solver", "expected ftgmres, rgmres or gmres");

    if (precond == "none")
      spec.precond = ftk::PrecondKind::Identity;
    else if (precond == "jacobi")
      spec.precond = ftk::PrecondKind::Jacobi;
    else if (precond == "ilu0")
      spec.precond = ftk::PrecondKind::Ilu0;
    else
      throw CLI::ValidationError("--precond", "expected none, jacobi or ilu0");

    if (refresh == "always")
      spec.refresh = ftk::RefreshMode::Always;
    else if (refresh == "ondetect")
      spec.refresh = ftk::RefreshMode::OnDetection;
    else
      throw CLI::ValidationError("--refresh", "expected always or ondetect");

    if (recovery == "retry")
      spec.recovery = ftk::RecoveryStrategy::RetryInner;
    else if (recovery == "randomz")
      spec.recovery = ftk::RecoveryStrategy::RandomZ;
    else if (recovery == "lastgood")
      spec.recovery = ftk::RecoveryStrategy::ReturnLastGood;
    else
      throw CLI::ValidationError("--recovery",
                                 "expected retry, randomz or lastgood");

    if (schedule == "decreasing")
      spec.schedule = ftk::InnerSchedule::Decreasing;
    else if (schedule == "constant")
      spec.schedule = ftk::InnerSchedule::Constant;
    else
      throw CLI::ValidationError("--schedule", "expected decreasing or constant");
    return spec;
  }
};

int cmd_run(CommonArgs& args) {
  const ExperimentSpec spec = args.finish();
  const ftk::harness::ExperimentResult result =
      ftk::harness::run_experiment(spec);
  if (!args.out_path.empty()) {
    std::ofstream out(args.out_path);
    if (!out) {
      std::cerr << "error: cannot write " << args.out_path << "\n";
      return 1;
    }
    ftk::harness::write_csv(out, result.records);
  }
  if (!args.faultlog_path.empty()) {
    std::ofstream out(args.faultlog_path);
    if (!out) {
      std::cerr << "error: cannot write " << args.faultlog_path << "\n";
      return 1;
    }
    out << result.faultlog_csv;
  }
  std::cout << ftk::harness::summary(result);
  return 0;
}

int cmd_table(CommonArgs& args, const std::string& tols_arg,
              const std::string& faults_arg, const std::string& out_path) {
  const ExperimentSpec base = args.finish();
  std::vector<double> tols;
  for (const std::string& t : split(tols_arg, ',')) tols.push_back(std::stod(t));
  std::vector<ftk::fault::FaultPolicy> faults;
  std::vector<std::string> labels;
  for (const std::string& f : split(faults_arg, ';')) {
    ftk::fault::FaultPolicy policy = parse_fault(f);
    policy.p_detect = base.fault.p_detect;
    policy.time_per_op = base.fault.time_per_op;
    faults.push_back(policy);
    labels.push_back(f);
  }
  const ftk::harness::IterationTable table =
      ftk::harness::run_iteration_table(base, tols, faults, labels);
  ftk::harness::print_table(std::cout, table);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) {
      std::cerr << "error: cannot write " << out_path << "\n";
      return 1;
    }
    ftk::harness::print_table(out, table);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fault-tolerant GMRES experiment driver"};
  app.require_subcommand(1);

  CommonArgs run_args;
  CLI::App* run = app.add_subcommand("run", "run one solver configuration");
  run->add_option("--solver", run_args.solver, "ftgmres, rgmres or gmres");
  run_args.register_options(run);

  CommonArgs table_args;
  std::string tols = "1e-2,1e-4,1e-6,1e-8";
  std::string faults = "none";
  std::string table_out;
  CLI::App* table = app.add_subcommand(
      "table", "FT-GMRES outer iterations to tolerance, per fault policy");
  table_args.register_options(table);
  table->add_option("--tols", tols, "comma-separated tolerances");
  table->add_option("--faults", faults, "semicolon-separated fault policies");
  table->add_option("--table-out", table_out, "also write the table here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_args);
    return cmd_table(table_args, tols, faults, table_out);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
