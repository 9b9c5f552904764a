#pragma once

// Frank-Wolfe over the product of floored Gelbrich balls: nature's
// least-favorable covariances and the Kalman controller that answers them.

#include <functional>
#include <string>
#include <vector>

#include "drlqg/ambiguity.hpp"
#include "drlqg/lqg.hpp"

namespace drlqg {

struct FWConfig {
  double delta = 0.95;    // oracle precision, in (0, 1)
  double tol = 1e-3;      // stop once the surrogate gap is <= tol (absolute)
  int max_iter = 1000;
  bool parallel_oracles = false;
  unsigned threads = 0;   // 0 = std::thread::hardware_concurrency()

  void validate() const;
};

struct FWRecord {
  int iter = 0;
  double f_value = 0.0;
  double surrogate_gap = 0.0;
  double elapsed_ms = 0.0;
};

struct FWTrace {
  std::vector<FWRecord> records;

  /// CSV with header "iter,f_value,surrogate_gap,elapsed_ms"; floats are
  /// printed with 17 significant digits. Without timing the last column is
  /// omitted, which gives a byte-stable form for reproducibility checks.
  std::string to_csv(bool with_timing = true) const;
};

enum class SolveStatus { kConverged, kMaxIterations };

const char* to_string(SolveStatus status);

struct RobustSolution {
  CovarianceProfile worst_case;
  KalmanController controller;
  FWTrace trace;
  double final_gap = 0.0;
  double f_value = 0.0;
  SolveStatus status = SolveStatus::kConverged;
  FWConfig config;

  bool converged() const { return status == SolveStatus::kConverged; }
};

/// Per-iteration view handed to an optional observer, after the gap of the
/// current iterate is known and before the update.
struct FWIterate {
  int iter;
  const CovarianceProfile& covariance;
  double f_value;
  double surrogate_gap;
  const std::vector<double>& block_gaps;
};

using FWObserver = std::function<void(const FWIterate&)>;

/// Starts at the nominal covariances; at iteration k each block's oracle is
/// called on the PSD-clamped gradient, the surrogate gap g is the sum of
/// block contributions in the order X0, W_0.., V_0.., and unless g <= tol the
/// iterate moves by 2 / (2 + k) towards the oracle points. When max_iter is
/// hit, the iterate with the smallest gap is returned as kMaxIterations.
RobustSolution solve(const TimeVaryingSystem& sys, const AmbiguitySpec& amb,
                     const FWConfig& cfg = {}, const FWObserver& observer = {});

/// Tolerance used to clamp gradient blocks before they reach the oracle.
inline constexpr double kGradientPsdRelTol = 1e-7;

}  // namespace drlqg
