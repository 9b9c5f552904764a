#pragma once

// Subcommands of the drlqg tool.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "drlqg/frank_wolfe.hpp"

namespace drlqg::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitNotConverged = 2,
  kExitInvalidInput = 3,
  kExitVerifyFailed = 4,
};

struct GenerateOptions {
  long n = 10;
  long m = 10;
  long p = 10;
  int T = 10;
  std::uint64_t seed = 0;
  double rho = 0.1;
  std::filesystem::path out;  // empty: write to the output stream
};

struct SolveOptions {
  std::filesystem::path instance;
  std::filesystem::path out_dir;
  FWConfig config;
};

struct EvaluateOptions {
  std::filesystem::path instance;
  std::filesystem::path controller;
  std::optional<std::filesystem::path> covariance;  // default: nominal
  long rollouts = 100000;
  std::uint64_t seed = 0;
  bool antithetic = false;
};

struct VerifyOptions {
  std::filesystem::path instance;
  std::filesystem::path result_dir;
  int samples = 100;
  std::uint64_t seed = 0;
};

inline constexpr const char* kWorstCaseFile = "worst_case.json";
inline constexpr const char* kControllerFile = "controller.json";
inline constexpr const char* kTraceFile = "trace.csv";
inline constexpr const char* kSummaryFile = "summary.json";

int cmd_generate(const GenerateOptions& opt, std::ostream& out, std::ostream& err);
int cmd_solve(const SolveOptions& opt, std::ostream& out, std::ostream& err);
int cmd_evaluate(const EvaluateOptions& opt, std::ostream& out, std::ostream& err);
int cmd_verify(const VerifyOptions& opt, std::ostream& out, std::ostream& err);

/// Parses the command line and dispatches.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace drlqg::cli
