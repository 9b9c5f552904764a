#pragma once

// Text file formats (JSON documents, row-major nested arrays of numbers)
// and small filesystem helpers. The schemas are documented in
// docs/file-formats.md.

#include <filesystem>
#include <string>
#include <vector>

#include "drlqg/frank_wolfe.hpp"
#include "drlqg/instance.hpp"
#include "drlqg/stacked.hpp"

namespace drlqg {

std::string serialize_instance(const Instance& inst);
/// Throws ErrorKind::kParse naming the line (syntax errors) or the field
/// path (schema errors), or the validation error of the parsed instance.
Instance parse_instance(const std::string& text);

std::string serialize_covariance(const CovarianceProfile& cov);
CovarianceProfile parse_covariance(const std::string& text);

/// Recursive gains plus the unrolled output-feedback gain U' for audit.
struct ControllerFile {
  std::vector<Matrix> K;
  std::vector<Matrix> L;
  LinearOutputController output;
};

ControllerFile controller_file(const KalmanController& ctrl);
std::string serialize_controller(const ControllerFile& ctrl);
ControllerFile parse_controller(const std::string& text);

/// Rebuilds a KalmanController from stored gains (covariance recursions are
/// not stored and stay empty).
KalmanController controller_from_file(const TimeVaryingSystem& sys,
                                      const ControllerFile& file);

struct SolveSummary {
  SolveStatus status = SolveStatus::kConverged;
  int iterations = 0;
  double final_gap = 0.0;
  double f_value = 0.0;
  FWConfig config;
};

std::string serialize_summary(const SolveSummary& s);
SolveSummary parse_summary(const std::string& text);

std::string read_file(const std::filesystem::path& path);

/// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace drlqg
