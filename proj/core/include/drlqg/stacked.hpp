#pragma once

// Stacked (whole-horizon) representation of the system and of linear
// causal controllers, in terms of either the observations y or the purified
// observations eta = y - yhat, where yhat is the output of a noise-free copy
// of the system driven by the same inputs.
//
// With w = (x_0, w_0..w_{T-1}) and v = (v_0..v_{T-1}):
//   x = H u + G w,   y = Cs x + v,   eta = D w + v,   D = Cs G.

#include <vector>

#include "drlqg/lqg.hpp"
#include "drlqg/simulate.hpp"

namespace drlqg {

struct StackedSystem {
  int T = 0;
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  Eigen::Index p = 0;
  Matrix Qs;  // n(T+1) x n(T+1), block diagonal
  Matrix Rs;  // mT x mT, block diagonal
  Matrix Cs;  // pT x n(T+1)
  Matrix G;   // n(T+1) x n(T+1), block lower triangular, identity diagonal
  Matrix H;   // n(T+1) x mT, first block row zero
  Matrix D;   // pT x n(T+1)
};

StackedSystem build_stacked(const TimeVaryingSystem& sys);

/// Block lower-triangular T x T grid of (rows x cols) blocks. Only the
/// blocks (t, s) with s <= t are stored, so causality is a property of the
/// type: blocks above the diagonal are zero by construction.
class BlockLowerTriangular {
 public:
  BlockLowerTriangular() = default;
  BlockLowerTriangular(int T, Eigen::Index block_rows, Eigen::Index block_cols);

  /// Throws kInvalidInput if any block above the diagonal is nonzero.
  static BlockLowerTriangular from_dense(const Matrix& dense, int T,
                                         Eigen::Index block_rows,
                                         Eigen::Index block_cols);

  int horizon() const { return T_; }
  Eigen::Index block_rows() const { return rows_; }
  Eigen::Index block_cols() const { return cols_; }

  /// Requires s <= t.
  Matrix& block(int t, int s);
  const Matrix& block(int t, int s) const;

  Matrix dense() const;

 private:
  std::size_t index(int t, int s) const;

  int T_ = 0;
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  std::vector<Matrix> blocks_;
};

/// u = U eta + q.
struct LinearPurifiedController {
  BlockLowerTriangular U;  // mT x pT
  Vector q;                // mT
};

/// u = U' y + q'.
struct LinearOutputController {
  BlockLowerTriangular U;  // mT x pT
  Vector q;                // mT
};

/// Stacks (X0, W_0..W_{T-1}) and (V_0..V_{T-1}) into block diagonals.
Matrix stacked_w(const CovarianceProfile& cov);
Matrix stacked_v(const CovarianceProfile& cov);

/// Runs the noise-free copy of the system (xhat_0 = 0) under the same
/// inputs and returns eta_t = y_t - C_t xhat_t.
std::vector<Vector> purified_from_rollout(const TimeVaryingSystem& sys,
                                          const std::vector<Vector>& u,
                                          const std::vector<Vector>& y);

/// Exact expected cost E[u^T R u + x^T Q x] of u = q + U eta:
///   Tr((D^T U^T M U D + 2 G^T Q H U D + G^T Q G) W)
///     + Tr(U^T M U V) + q^T M q,        M = R + H^T Q H.
double controller_cost_trace(const StackedSystem& st,
                             const LinearPurifiedController& ctrl,
                             const CovarianceProfile& cov);

/// U' = (I + U Cs H)^{-1} U,  q' = (I + U Cs H)^{-1} q.
LinearOutputController purified_to_output(const LinearPurifiedController& ctrl,
                                          const StackedSystem& st);

/// U = (I - U' Cs H)^{-1} U',  q = (I - U' Cs H)^{-1} q'.
LinearPurifiedController output_to_purified(const LinearOutputController& ctrl,
                                            const StackedSystem& st);

/// Expands the recursive Kalman controller into u = U' y (q' = 0).
LinearOutputController unroll_kalman(const TimeVaryingSystem& sys,
                                     const CovarianceProfile& cov);
LinearOutputController unroll_kalman(const KalmanController& controller);

/// Causal policy u = U' y + q'.
class OutputFeedbackPolicy final : public CausalPolicy {
 public:
  explicit OutputFeedbackPolicy(const LinearOutputController& ctrl);
  void reset() override;
  Vector act(int t, const Vector& y) override;

 private:
  const LinearOutputController* ctrl_;
  std::vector<Vector> history_;
};

/// Causal policy u = U eta + q; tracks the noise-free system internally.
class PurifiedFeedbackPolicy final : public CausalPolicy {
 public:
  PurifiedFeedbackPolicy(const TimeVaryingSystem& sys,
                         const LinearPurifiedController& ctrl);
  void reset() override;
  Vector act(int t, const Vector& y) override;

 private:
  const TimeVaryingSystem* sys_;
  const LinearPurifiedController* ctrl_;
  Vector xhat_;
  std::vector<Vector> eta_;
};

}  // namespace drlqg
