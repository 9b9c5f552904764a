#pragma once

#include <vector>

#include "drlqg/lqg.hpp"

namespace drlqg {

/// Gradient of lqg_value with respect to each covariance block.
struct GradientBlocks {
  Matrix dX0;
  std::vector<Matrix> dW;
  std::vector<Matrix> dV;

  /// Same block order as CovarianceProfile::block.
  const Matrix& block(int index) const;
};

/// Reverse-mode pass through the Kalman covariance recursion. The Riccati
/// matrices P_t do not depend on the covariances and are held fixed.
///
/// With S = Sigma_{t|t-1}, M = C S C^T + V_t and Kt = S C^T M^{-1}, one
/// filter step has the differentials
///   d Sigma_t = (I - Kt C) dS (I - Kt C)^T     (through S)
///   d Sigma_t = Kt dV_t Kt^T                   (through V_t)
/// whose adjoints are applied backward from the terms of the value.
GradientBlocks grad_f(const TimeVaryingSystem& sys, const CovarianceProfile& cov);

/// Value and gradient from one Riccati and one Kalman pass.
struct ValueAndGradient {
  double value = 0.0;
  GradientBlocks grad;
};
ValueAndGradient value_and_grad(const TimeVaryingSystem& sys,
                                const CovarianceProfile& cov);

/// Central finite differences of lqg_value with symmetric perturbations
/// step * (e_i e_j^T + e_j e_i^T) / 2, so each entry approximates the
/// matching entry of the symmetric gradient. If a perturbed V_t
/// loses definiteness the step is reduced once by 10x before failing.
GradientBlocks fd_grad(const TimeVaryingSystem& sys, const CovarianceProfile& cov,
                       double step = 1e-5);

/// Relative Frobenius distance |a - b| / max(|b|, tiny) over all blocks.
double relative_error(const GradientBlocks& a, const GradientBlocks& b);

}  // namespace drlqg
