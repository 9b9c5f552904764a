#pragma once

// Finite-horizon LQG: Riccati backward pass, Kalman forward pass, the
// optimal value as a function of the noise covariances, and the recursive
// Kalman-filter-based controller.

#include <vector>

#include "drlqg/linalg.hpp"

namespace drlqg {

/// x_{t+1} = A_t x_t + B_t u_t + w_t,  y_t = C_t x_t + v_t, with stage cost
/// x_t^T Q_t x_t + u_t^T R_t u_t and terminal cost x_T^T Q_T x_T.
struct TimeVaryingSystem {
  std::vector<Matrix> A;  // T matrices, n x n
  std::vector<Matrix> B;  // T matrices, n x m
  std::vector<Matrix> C;  // T matrices, p x n
  std::vector<Matrix> Q;  // T + 1 PSD matrices, n x n
  std::vector<Matrix> R;  // T PD matrices, m x m

  int horizon() const { return static_cast<int>(A.size()); }
  Eigen::Index n() const { return A.empty() ? 0 : A.front().rows(); }
  Eigen::Index m() const { return B.empty() ? 0 : B.front().cols(); }
  Eigen::Index p() const { return C.empty() ? 0 : C.front().rows(); }

  /// Throws kDimensionMismatch / kNotPsd / kInvalidInput on violations.
  void validate() const;
};

/// Covariances of x_0, w_0..w_{T-1} and v_0..v_{T-1}.
struct CovarianceProfile {
  Matrix X0;
  std::vector<Matrix> W;
  std::vector<Matrix> V;

  int horizon() const { return static_cast<int>(W.size()); }

  /// Checks shapes against `sys` and that every block is symmetric PSD.
  void validate(const TimeVaryingSystem& sys) const;

  /// Number of covariance blocks, 2T + 1.
  int num_blocks() const { return 1 + 2 * horizon(); }

  /// Blocks in the fixed order X0, W_0..W_{T-1}, V_0..V_{T-1}.
  const Matrix& block(int index) const;
  Matrix& block(int index);
};

struct RiccatiSolution {
  std::vector<Matrix> P;  // P_0..P_T
  std::vector<Matrix> K;  // K_0..K_{T-1}
};

struct KalmanSolution {
  std::vector<Matrix> Sigma;      // Sigma_t = Cov(x_t | y_0..y_t), t = 0..T-1
  std::vector<Matrix> SigmaPred;  // Sigma_{t|t-1}, t = 0..T; [0] == X0
  std::vector<Matrix> L;          // L_t = Sigma_t C_t^T V_t^{-1}
};

RiccatiSolution riccati_backward(const TimeVaryingSystem& sys);

/// Requires every V_t positive definite; the error names the stage.
KalmanSolution kalman_forward(const TimeVaryingSystem& sys,
                              const CovarianceProfile& cov);

/// Optimal expected LQG cost under zero-mean noise with covariances `cov`:
///   sum_{t<T} Tr((Q_t - P_t) Sigma_t)
///     + sum_{t=1}^{T} Tr(P_t (A_{t-1} Sigma_{t-1} A_{t-1}^T + W_{t-1}))
///     + Tr(P_0 X0).
double lqg_value(const TimeVaryingSystem& sys, const CovarianceProfile& cov);

/// Same value from precomputed recursions.
double lqg_value(const TimeVaryingSystem& sys, const CovarianceProfile& cov,
                 const RiccatiSolution& ric, const KalmanSolution& kal);

/// u_t = K_t xhat_t with the MMSE estimator
///   xhat_0 = L_0 y_0,
///   xhat_{t+1} = A_t xhat_t + B_t u_t
///                + L_{t+1} (y_{t+1} - C_{t+1} (A_t xhat_t + B_t u_t)).
/// Immutable once assembled; KalmanPolicy carries the per-rollout state.
struct KalmanController {
  TimeVaryingSystem system;
  RiccatiSolution riccati;
  KalmanSolution kalman;
};

KalmanController assemble_controller(const TimeVaryingSystem& sys,
                                     const CovarianceProfile& cov);

/// Scalar all-ones instance used throughout the tests and docs:
/// T = 1 and A = B = C = Q_0 = Q_1 = R = X0 = W = V = 1.
TimeVaryingSystem scalar_ones_system();
CovarianceProfile scalar_ones_covariance();

}  // namespace drlqg
