#include "drlqg/stacked.hpp"

#include <string>

#include "drlqg/error.hpp"

namespace drlqg {

StackedSystem build_stacked(const TimeVaryingSystem& sys) {
  sys.validate();
  StackedSystem st;
  const int T = sys.horizon();
  const Eigen::Index n = sys.n();
  const Eigen::Index m = sys.m();
  const Eigen::Index p = sys.p();
  st.T = T;
  st.n = n;
  st.m = m;
  st.p = p;

  st.Qs = block_diag(sys.Q);
  st.Rs = block_diag(sys.R);

  st.Cs = Matrix::Zero(p * T, n * (T + 1));
  for (int t = 0; t < T; ++t) st.Cs.block(p * t, n * t, p, n) = sys.C[t];

  // G(t, s) = A_{t-1} ... A_s for s < t and I for s == t.
  // H(t, s) = G(t, s + 1) B_s for s < t.
  st.G = Matrix::Zero(n * (T + 1), n * (T + 1));
  st.H = Matrix::Zero(n * (T + 1), m * T);
  for (int s = 0; s <= T; ++s) {
    Matrix prod = Matrix::Identity(n, n);
    st.G.block(n * s, n * s, n, n) = prod;
    for (int t = s + 1; t <= T; ++t) {
      prod = sys.A[t - 1] * prod;
      st.G.block(n * t, n * s, n, n) = prod;
    }
  }
  for (int s = 0; s < T; ++s) {
    for (int t = s + 1; t <= T; ++t) {
      st.H.block(n * t, m * s, n, m) = st.G.block(n * t, n * (s + 1), n, n) * sys.B[s];
    }
  }
  st.D = st.Cs * st.G;
  return st;
}

BlockLowerTriangular::BlockLowerTriangular(int T, Eigen::Index block_rows,
                                           Eigen::Index block_cols)
    : T_(T), rows_(block_rows), cols_(block_cols) {
  DRLQG_THROW_UNLESS(T >= 1 && block_rows >= 1 && block_cols >= 1,
                     ErrorKind::kInvalidInput,
                     "block lower-triangular matrix needs positive dimensions");
  blocks_.assign(static_cast<std::size_t>(T) * (T + 1) / 2,
                 Matrix::Zero(block_rows, block_cols));
}

std::size_t BlockLowerTriangular::index(int t, int s) const {
  DRLQG_THROW_UNLESS(0 <= s && s <= t && t < T_, ErrorKind::kInvalidInput,
                     "block (" + std::to_string(t) + ", " + std::to_string(s) +
                         ") is not on or below the diagonal");
  return static_cast<std::size_t>(t) * (t + 1) / 2 + s;
}

Matrix& BlockLowerTriangular::block(int t, int s) { return blocks_[index(t, s)]; }

const Matrix& BlockLowerTriangular::block(int t, int s) const {
  return blocks_[index(t, s)];
}

Matrix BlockLowerTriangular::dense() const {
  Matrix out = Matrix::Zero(rows_ * T_, cols_ * T_);
  for (int t = 0; t < T_; ++t) {
    for (int s = 0; s <= t; ++s) {
      out.block(rows_ * t, cols_ * s, rows_, cols_) = block(t, s);
    }
  }
  return out;
}

BlockLowerTriangular BlockLowerTriangular::from_dense(const Matrix& dense, int T,
                                                      Eigen::Index block_rows,
                                                      Eigen::Index block_cols) {
  DRLQG_THROW_UNLESS(dense.rows() == block_rows * T &&
                         dense.cols() == block_cols * T,
                     ErrorKind::kDimensionMismatch,
                     "dense gain has the wrong shape for a block grid");
  BlockLowerTriangular out(T, block_rows, block_cols);
  for (int t = 0; t < T; ++t) {
    for (int s = 0; s < T; ++s) {
      auto blk = dense.block(block_rows * t, block_cols * s, block_rows, block_cols);
      if (s <= t) {
        out.block(t, s) = blk;
      } else {
        DRLQG_THROW_UNLESS((blk.array() == 0.0).all(), ErrorKind::kInvalidInput,
                           "gain is not causal: block (" + std::to_string(t) +
                               ", " + std::to_string(s) + ") is nonzero");
      }
    }
  }
  return out;
}

Matrix stacked_w(const CovarianceProfile& cov) {
  std::vector<Matrix> blocks;
  blocks.reserve(cov.W.size() + 1);
  blocks.push_back(cov.X0);
  blocks.insert(blocks.end(), cov.W.begin(), cov.W.end());
  return block_diag(blocks);
}

Matrix stacked_v(const CovarianceProfile& cov) { return block_diag(cov.V); }

std::vector<Vector> purified_from_rollout(const TimeVaryingSystem& sys,
                                          const std::vector<Vector>& u,
                                          const std::vector<Vector>& y) {
  const int T = sys.horizon();
  DRLQG_THROW_UNLESS(static_cast<int>(u.size()) == T &&
                         static_cast<int>(y.size()) == T,
                     ErrorKind::kDimensionMismatch,
                     "purified_from_rollout: trajectories must have T entries");
  std::vector<Vector> eta;
  eta.reserve(T);
  Vector xhat = Vector::Zero(sys.n());
  for (int t = 0; t < T; ++t) {
    DRLQG_THROW_UNLESS(u[t].size() == sys.m() && y[t].size() == sys.p(),
                       ErrorKind::kDimensionMismatch,
                       "purified_from_rollout: bad vector size at stage " +
                           std::to_string(t));
    eta.push_back(y[t] - sys.C[t] * xhat);
    xhat = sys.A[t] * xhat + sys.B[t] * u[t];
  }
  return eta;
}

namespace {

void check_gain(const StackedSystem& st, const BlockLowerTriangular& U,
                const Vector& q) {
  DRLQG_THROW_UNLESS(U.horizon() == st.T && U.block_rows() == st.m &&
                         U.block_cols() == st.p && q.size() == st.m * st.T,
                     ErrorKind::kDimensionMismatch,
                     "controller dimensions do not match the stacked system");
}

// Solves (I + N) X = rhs by forward substitution over block rows, where N
// is strictly block lower triangular with m-row blocks.
Matrix unit_lower_solve(const Matrix& N, const Matrix& rhs, int T,
                        Eigen::Index m) {
  Matrix X = rhs;
  for (int t = 0; t < T; ++t) {
    for (int s = 0; s < t; ++s) {
      X.middleRows(m * t, m).noalias() -=
          N.block(m * t, m * s, m, m) * X.middleRows(m * s, m);
    }
  }
  return X;
}

}  // namespace

double controller_cost_trace(const StackedSystem& st,
                             const LinearPurifiedController& ctrl,
                             const CovarianceProfile& cov) {
  check_gain(st, ctrl.U, ctrl.q);
  DRLQG_THROW_UNLESS(cov.horizon() == st.T &&
                         static_cast<int>(cov.V.size()) == st.T,
                     ErrorKind::kDimensionMismatch,
                     "covariance horizon does not match the stacked system");
  const Matrix W = stacked_w(cov);
  const Matrix V = stacked_v(cov);
  DRLQG_THROW_UNLESS(W.rows() == st.G.cols() && V.rows() == st.Cs.rows(),
                     ErrorKind::kDimensionMismatch,
                     "covariance blocks do not match the stacked system");
  const Matrix U = ctrl.U.dense();
  const Matrix M = st.Rs + st.H.transpose() * st.Qs * st.H;
  const Matrix UD = U * st.D;
  const Matrix QG = st.Qs * st.G;
  const Matrix w_form = UD.transpose() * M * UD +
                        2.0 * QG.transpose() * st.H * UD +
                        st.G.transpose() * QG;
  const Matrix v_form = U.transpose() * M * U;
  return inner(w_form.transpose(), W) + inner(v_form.transpose(), V) +
         ctrl.q.dot(M * ctrl.q);
}

LinearOutputController purified_to_output(const LinearPurifiedController& ctrl,
                                          const StackedSystem& st) {
  check_gain(st, ctrl.U, ctrl.q);
  const Matrix U = ctrl.U.dense();
  const Matrix N = U * st.Cs * st.H;
  const Matrix Up = unit_lower_solve(N, U, st.T, st.m);
  const Vector qp = unit_lower_solve(N, ctrl.q, st.T, st.m);
  return {BlockLowerTriangular::from_dense(Up, st.T, st.m, st.p), qp};
}

LinearPurifiedController output_to_purified(const LinearOutputController& ctrl,
                                            const StackedSystem& st) {
  check_gain(st, ctrl.U, ctrl.q);
  const Matrix Up = ctrl.U.dense();
  const Matrix N = -(Up * st.Cs * st.H);
  const Matrix U = unit_lower_solve(N, Up, st.T, st.m);
  const Vector q = unit_lower_solve(N, ctrl.q, st.T, st.m);
  return {BlockLowerTriangular::from_dense(U, st.T, st.m, st.p), q};
}

LinearOutputController unroll_kalman(const KalmanController& controller) {
  const TimeVaryingSystem& sys = controller.system;
  const int T = sys.horizon();
  const Eigen::Index n = sys.n();
  const Eigen::Index p = sys.p();
  const auto& K = controller.riccati.K;
  const auto& L = controller.kalman.L;

  LinearOutputController out{BlockLowerTriangular(T, sys.m(), p),
                             Vector::Zero(sys.m() * T)};
  // xhat_t = E y with E nonzero only in the first t + 1 column blocks.
  Matrix E = Matrix::Zero(n, p * T);
  E.middleCols(0, p) = L[0];
  for (int t = 0; t < T; ++t) {
    const Matrix KE = K[t] * E;
    for (int s = 0; s <= t; ++s) out.U.block(t, s) = KE.middleCols(p * s, p);
    if (t + 1 == T) break;
    const Matrix pred = sys.A[t] * E + sys.B[t] * KE;
    E = (Matrix::Identity(n, n) - L[t + 1] * sys.C[t + 1]) * pred;
    E.middleCols(p * (t + 1), p) += L[t + 1];
  }
  return out;
}

LinearOutputController unroll_kalman(const TimeVaryingSystem& sys,
                                     const CovarianceProfile& cov) {
  return unroll_kalman(assemble_controller(sys, cov));
}

OutputFeedbackPolicy::OutputFeedbackPolicy(const LinearOutputController& ctrl)
    : ctrl_(&ctrl) {}

void OutputFeedbackPolicy::reset() { history_.clear(); }

Vector OutputFeedbackPolicy::act(int t, const Vector& y) {
  DRLQG_THROW_UNLESS(t == static_cast<int>(history_.size()),
                     ErrorKind::kInvalidInput,
                     "OutputFeedbackPolicy: stages must be visited in order");
  history_.push_back(y);
  const Eigen::Index m = ctrl_->U.block_rows();
  Vector u = ctrl_->q.segment(m * t, m);
  for (int s = 0; s <= t; ++s) u += ctrl_->U.block(t, s) * history_[s];
  return u;
}

PurifiedFeedbackPolicy::PurifiedFeedbackPolicy(
    const TimeVaryingSystem& sys, const LinearPurifiedController& ctrl)
    : sys_(&sys), ctrl_(&ctrl) {}

void PurifiedFeedbackPolicy::reset() {
  xhat_ = Vector::Zero(sys_->n());
  eta_.clear();
}

Vector PurifiedFeedbackPolicy::act(int t, const Vector& y) {
  DRLQG_THROW_UNLESS(t == static_cast<int>(eta_.size()),
                     ErrorKind::kInvalidInput,
                     "PurifiedFeedbackPolicy: stages must be visited in order");
  eta_.push_back(y - sys_->C[t] * xhat_);
  const Eigen::Index m = ctrl_->U.block_rows();
  Vector u = ctrl_->q.segment(m * t, m);
  for (int s = 0; s <= t; ++s) u += ctrl_->U.block(t, s) * eta_[s];
  xhat_ = sys_->A[t] * xhat_ + sys_->B[t] * u;
  return u;
}

}  // namespace drlqg
