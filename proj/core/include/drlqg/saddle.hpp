#pragma once

// Numerical audit of a solved instance as a zero-sum game: nature should not
// gain by moving away from the worst-case covariances, and the controller
// should not gain by moving away from its Kalman-based policy.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "drlqg/frank_wolfe.hpp"
#include "drlqg/stacked.hpp"

namespace drlqg {

struct SaddleReport {
  double f_star = 0.0;          // lqg_value at the worst case
  double scale = 1.0;           // max(1, |f_star|)
  double nature_slack = 0.0;    // allowed excess on the nature side
  double max_nature_excess = 0.0;      // max over samples of cost - f_star
  double min_controller_change = 0.0;  // min over samples of cost - f_star
  int nature_samples = 0;
  int controller_samples = 0;
  int nature_violations = 0;
  int controller_violations = 0;
  bool feasible = true;         // worst case inside every ball (1e-7)
  std::vector<std::string> messages;

  bool passed() const {
    return feasible && nature_violations == 0 && controller_violations == 0;
  }
};

/// Draws a point of the floored ball of the form M Zhat M with
/// M = I + s E, E a random PSD direction, so that
/// G(Z, Zhat)^2 = Tr(Zhat (M - I)^2) <= radius^2 and Z >= lambda_min(Zhat) I.
/// Half of the draws lie on the boundary.
SymMatrix sample_in_ball(const GelbrichBall& ball, std::mt19937_64& rng);

CovarianceProfile sample_profile(const AmbiguitySpec& amb, std::mt19937_64& rng);

/// Nature side: for the worst-case Kalman controller u*, checks
/// cost(u*, P) <= f* + slack for nature's exact best response and
/// n_samples - 1 random profiles P, with
/// slack = max(10 * g, 1e-6 * scale) where g is the final gap for a converged
/// solution and the configured tolerance otherwise.
/// Controller side: for n_samples random causal perturbations (dU, dq) of u*
/// checks cost(u* + du, P*) >= f* - 1e-9 * scale.
SaddleReport saddle_check(const TimeVaryingSystem& sys, const AmbiguitySpec& amb,
                          const RobustSolution& sol, int n_samples,
                          std::uint64_t seed);

}  // namespace drlqg
