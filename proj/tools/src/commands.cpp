#include "drlqg_tools/commands.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <ostream>

#include "drlqg/error.hpp"
#include "drlqg/io.hpp"
#include "drlqg/saddle.hpp"
#include "drlqg/simulate.hpp"
#include "drlqg/stacked.hpp"

namespace drlqg::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::kNoConvergence:
      return kExitFailure;
    default:
      return kExitInvalidInput;
  }
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  }
}

Instance load_instance(const fs::path& path) {
  try {
    return parse_instance(read_file(path));
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return INFINITY;
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

int cmd_generate(const GenerateOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    DRLQG_THROW_UNLESS(opt.n >= 1 && opt.m >= 1 && opt.p >= 1 && opt.T >= 1,
                       ErrorKind::kInvalidInput, "dimensions must be >= 1");
    DRLQG_THROW_UNLESS(std::isfinite(opt.rho) && opt.rho >= 0.0, ErrorKind::kInvalidInput,
                       "rho must be finite and >= 0");
    const std::string text =
        serialize_instance(generate_instance(opt.n, opt.m, opt.p, opt.T, opt.seed, opt.rho));
    if (opt.out.empty()) {
      out << text;
    } else {
      write_file_atomic(opt.out, text);
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_solve(const SolveOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    opt.config.validate();
    const Instance inst = load_instance(opt.instance);
    const RobustSolution sol = solve(inst.system, inst.ambiguity, opt.config);

    fs::create_directories(opt.out_dir);
    write_file_atomic(opt.out_dir / kWorstCaseFile, serialize_covariance(sol.worst_case));
    write_file_atomic(opt.out_dir / kControllerFile,
                      serialize_controller(controller_file(sol.controller)));
    write_file_atomic(opt.out_dir / kTraceFile, sol.trace.to_csv());
    SolveSummary summary;
    summary.status = sol.status;
    summary.iterations = static_cast<int>(sol.trace.records.size());
    summary.final_gap = sol.final_gap;
    summary.f_value = sol.f_value;
    summary.config = sol.config;
    write_file_atomic(opt.out_dir / kSummaryFile, serialize_summary(summary));

    out << "status: " << to_string(sol.status) << "\n"
        << "iterations: " << summary.iterations << "\n"
        << "final_gap: " << fmt(sol.final_gap) << "\n"
        << "worst_case_value: " << fmt(sol.f_value) << "\n"
        << "results: " << opt.out_dir.string() << "\n";
    return static_cast<int>(sol.converged() ? kExitOk : kExitNotConverged);
  });
}

int cmd_evaluate(const EvaluateOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    DRLQG_THROW_UNLESS(opt.rollouts >= 2, ErrorKind::kInvalidInput,
                       "need at least 2 rollouts");
    const Instance inst = load_instance(opt.instance);
    const TimeVaryingSystem& sys = inst.system;
    const ControllerFile file = parse_controller(read_file(opt.controller));
    const CovarianceProfile cov =
        opt.covariance ? parse_covariance(read_file(*opt.covariance)) : inst.ambiguity.nominal;
    cov.validate(sys);

    const KalmanController ctrl = controller_from_file(sys, file);
    const StackedSystem st = build_stacked(sys);
    const double exact = controller_cost_trace(st, output_to_purified(file.output, st), cov);
    KalmanPolicy policy(ctrl);
    const MonteCarloEstimate mc =
        monte_carlo_cost(sys, policy, cov, opt.rollouts, opt.seed, opt.antithetic);
    const double z = mc.std_error > 0.0 ? std::abs(mc.mean - exact) / mc.std_error
                                        : (mc.mean == exact ? 0.0 : INFINITY);

    out << "exact_cost: " << fmt(exact) << "\n"
        << "lqg_optimal_cost: " << fmt(lqg_value(sys, cov)) << "\n"
        << "monte_carlo_mean: " << fmt(mc.mean) << "\n"
        << "monte_carlo_std_error: " << fmt(mc.std_error) << "\n"
        << "rollouts: " << mc.samples << "\n"
        << "deviation_in_std_errors: " << fmt(z) << "\n";
    if (z > 3.0) {
      out << "DISAGREEMENT: Monte Carlo mean is more than 3 standard errors from the exact cost\n";
      return static_cast<int>(kExitVerifyFailed);
    }
    out << "agreement: within 3 standard errors\n";
    return static_cast<int>(kExitOk);
  });
}

int cmd_verify(const VerifyOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    DRLQG_THROW_UNLESS(opt.samples >= 1, ErrorKind::kInvalidInput, "need at least 1 sample");
    const Instance inst = load_instance(opt.instance);
    const TimeVaryingSystem& sys = inst.system;
    const SolveSummary summary = parse_summary(read_file(opt.result_dir / kSummaryFile));
    RobustSolution sol;
    sol.worst_case = parse_covariance(read_file(opt.result_dir / kWorstCaseFile));
    sol.worst_case.validate(sys);
    sol.status = summary.status;
    sol.final_gap = summary.final_gap;
    sol.f_value = summary.f_value;
    sol.config = summary.config;
    sol.controller = assemble_controller(sys, sol.worst_case);

    std::vector<std::string> problems;
    // The stored controller must be the Kalman controller of the stored
    // worst case.
    const ControllerFile stored = parse_controller(read_file(opt.result_dir / kControllerFile));
    const ControllerFile expected = controller_file(sol.controller);
    double gain_diff = max_abs_diff(stored.output.U.dense(), expected.output.U.dense());
    for (int t = 0; t < sys.horizon(); ++t) {
      gain_diff = std::max(gain_diff, max_abs_diff(stored.K.at(t), expected.K[t]));
      gain_diff = std::max(gain_diff, max_abs_diff(stored.L.at(t), expected.L[t]));
    }
    if (!(gain_diff <= 1e-9)) {
      problems.push_back("controller file does not match the worst-case covariances (max gain "
                         "difference " + fmt(gain_diff) + ")");
    }
    const double f_star = lqg_value(sys, sol.worst_case);
    if (!(std::abs(f_star - summary.f_value) <= 1e-9 * std::max(1.0, std::abs(f_star)))) {
      problems.push_back("summary value " + fmt(summary.f_value) +
                         " differs from the recomputed value " + fmt(f_star));
    }

    const SaddleReport rep = saddle_check(sys, inst.ambiguity, sol, opt.samples, opt.seed);
    out << "worst_case_value: " << fmt(rep.f_star) << "\n"
        << "feasible: " << (rep.feasible ? "yes" : "no") << "\n"
        << "nature_samples: " << rep.nature_samples << "\n"
        << "nature_slack: " << fmt(rep.nature_slack) << "\n"
        << "max_nature_excess: " << fmt(rep.max_nature_excess) << "\n"
        << "nature_violations: " << rep.nature_violations << "\n"
        << "controller_samples: " << rep.controller_samples << "\n"
        << "min_controller_change: " << fmt(rep.min_controller_change) << "\n"
        << "controller_violations: " << rep.controller_violations << "\n";
    for (const auto& m : rep.messages) problems.push_back(m);
    constexpr std::size_t kShown = 10;
    for (std::size_t i = 0; i < problems.size() && i < kShown; ++i) {
      out << "violation: " << problems[i] << "\n";
    }
    if (problems.size() > kShown) {
      out << "... and " << problems.size() - kShown << " more violations\n";
    }
    const bool ok = rep.passed() && problems.empty();
    out << (ok ? "PASS" : "FAIL") << "\n";
    return static_cast<int>(ok ? kExitOk : kExitVerifyFailed);
  });
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Distributionally robust finite-horizon LQG solver", "drlqg"};
  app.require_subcommand(1);

  GenerateOptions gen;
  std::string gen_out;
  auto* generate = app.add_subcommand("generate", "Write a seeded banded test instance");
  generate->add_option("--n", gen.n, "State dimension")->check(CLI::PositiveNumber);
  generate->add_option("--m", gen.m, "Input dimension")->check(CLI::PositiveNumber);
  generate->add_option("--p", gen.p, "Output dimension")->check(CLI::PositiveNumber);
  generate->add_option("--T,--horizon", gen.T, "Horizon")->check(CLI::PositiveNumber);
  generate->add_option("--seed", gen.seed, "Generator seed");
  generate->add_option("--rho", gen.rho, "Radius of every ambiguity ball")
      ->check(CLI::NonNegativeNumber);
  generate->add_option("--out", gen_out, "Output file (default: stdout)");

  SolveOptions sol;
  std::string sol_instance, sol_out;
  unsigned threads = 1;
  auto* solve_cmd = app.add_subcommand("solve", "Run Frank-Wolfe on an instance");
  solve_cmd->add_option("instance", sol_instance, "Instance file")->required();
  solve_cmd->add_option("--out", sol_out, "Result directory")->required();
  solve_cmd->add_option("--tol", sol.config.tol, "Surrogate-gap tolerance (absolute)");
  solve_cmd->add_option("--delta", sol.config.delta, "Oracle precision in (0, 1)");
  solve_cmd->add_option("--max-iter", sol.config.max_iter, "Iteration limit");
  solve_cmd->add_option("--threads", threads,
                        "Oracle threads; 1 runs serially, 0 uses all cores");

  EvaluateOptions ev;
  std::string ev_instance, ev_controller, ev_cov;
  auto* evaluate = app.add_subcommand("evaluate", "Exact and Monte Carlo cost of a controller");
  evaluate->add_option("instance", ev_instance, "Instance file")->required();
  evaluate->add_option("controller", ev_controller, "Controller file")->required();
  evaluate->add_option("covariance", ev_cov, "Covariance file (default: nominal)");
  evaluate->add_option("--rollouts", ev.rollouts, "Number of Monte Carlo rollouts");
  evaluate->add_option("--seed", ev.seed, "Sampling seed");
  evaluate->add_flag("--antithetic", ev.antithetic, "Use antithetic pairs");

  VerifyOptions ver;
  std::string ver_instance, ver_dir;
  auto* verify = app.add_subcommand("verify", "Saddle-point and feasibility audit of a result");
  verify->add_option("instance", ver_instance, "Instance file")->required();
  verify->add_option("results", ver_dir, "Result directory written by solve")->required();
  verify->add_option("--samples", ver.samples, "Samples per side");
  verify->add_option("--seed", ver.seed, "Sampling seed");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  }

  if (generate->parsed()) {
    gen.out = gen_out;
    return cmd_generate(gen, out, err);
  }
  if (solve_cmd->parsed()) {
    sol.instance = sol_instance;
    sol.out_dir = sol_out;
    sol.config.parallel_oracles = threads != 1;
    sol.config.threads = threads;
    return cmd_solve(sol, out, err);
  }
  if (evaluate->parsed()) {
    ev.instance = ev_instance;
    ev.controller = ev_controller;
    if (!ev_cov.empty()) ev.covariance = ev_cov;
    return cmd_evaluate(ev, out, err);
  }
  ver.instance = ver_instance;
  ver.result_dir = ver_dir;
  return cmd_verify(ver, out, err);
}

}  // namespace drlqg::cli
