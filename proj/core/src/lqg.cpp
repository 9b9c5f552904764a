#include "drlqg/lqg.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "drlqg/error.hpp"

namespace drlqg {

namespace {

std::string stage_name(const char* what, int t) {
  return std::string(what) + "[" + std::to_string(t) + "]";
}

void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                   const std::string& name) {
  DRLQG_THROW_UNLESS(m.rows() == rows && m.cols() == cols,
                     ErrorKind::kDimensionMismatch,
                     name + " has shape " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", expected " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  DRLQG_THROW_UNLESS(all_finite(m), ErrorKind::kInvalidInput,
                     name + " has non-finite entries");
}

void require_symmetric_psd(const Matrix& m, const std::string& name) {
  const double scale = std::max(1.0, m.norm());
  DRLQG_THROW_UNLESS((m - m.transpose()).norm() <= 1e-10 * scale,
                     ErrorKind::kInvalidInput, name + " is not symmetric");
  DRLQG_THROW_UNLESS(is_psd(m), ErrorKind::kNotPsd,
                     name + " is not positive semidefinite");
}

}  // namespace

void TimeVaryingSystem::validate() const {
  const int T = horizon();
  DRLQG_THROW_UNLESS(T >= 1, ErrorKind::kInvalidInput,
                     "system horizon must be >= 1");
  DRLQG_THROW_UNLESS(static_cast<int>(B.size()) == T &&
                         static_cast<int>(C.size()) == T &&
                         static_cast<int>(R.size()) == T &&
                         static_cast<int>(Q.size()) == T + 1,
                     ErrorKind::kDimensionMismatch,
                     "system needs T matrices A, B, C, R and T+1 matrices Q");
  const Eigen::Index nn = n();
  const Eigen::Index mm = m();
  const Eigen::Index pp = p();
  DRLQG_THROW_UNLESS(nn >= 1 && mm >= 1 && pp >= 1,
                     ErrorKind::kInvalidInput,
                     "system dimensions n, m, p must be >= 1");
  for (int t = 0; t < T; ++t) {
    require_shape(A[t], nn, nn, stage_name("A", t));
    require_shape(B[t], nn, mm, stage_name("B", t));
    require_shape(C[t], pp, nn, stage_name("C", t));
    require_shape(R[t], mm, mm, stage_name("R", t));
    require_symmetric_psd(R[t], stage_name("R", t));
    DRLQG_THROW_UNLESS(min_eigenvalue(R[t]) > 0.0, ErrorKind::kNotPsd,
                       stage_name("R", t) + " is not positive definite");
  }
  for (int t = 0; t <= T; ++t) {
    require_shape(Q[t], nn, nn, stage_name("Q", t));
    require_symmetric_psd(Q[t], stage_name("Q", t));
  }
}

void CovarianceProfile::validate(const TimeVaryingSystem& sys) const {
  const int T = sys.horizon();
  DRLQG_THROW_UNLESS(horizon() == T && static_cast<int>(V.size()) == T,
                     ErrorKind::kDimensionMismatch,
                     "covariance profile horizon does not match the system");
  require_shape(X0, sys.n(), sys.n(), "X0");
  require_symmetric_psd(X0, "X0");
  for (int t = 0; t < T; ++t) {
    require_shape(W[t], sys.n(), sys.n(), stage_name("W", t));
    require_symmetric_psd(W[t], stage_name("W", t));
    require_shape(V[t], sys.p(), sys.p(), stage_name("V", t));
    require_symmetric_psd(V[t], stage_name("V", t));
  }
}

const Matrix& CovarianceProfile::block(int index) const {
  const int T = horizon();
  DRLQG_THROW_UNLESS(index >= 0 && index < 2 * T + 1,
                     ErrorKind::kInvalidInput,
                     "covariance block index out of range");
  if (index == 0) return X0;
  if (index <= T) return W[index - 1];
  return V[index - 1 - T];
}

Matrix& CovarianceProfile::block(int index) {
  return const_cast<Matrix&>(std::as_const(*this).block(index));
}

RiccatiSolution riccati_backward(const TimeVaryingSystem& sys) {
  sys.validate();
  const int T = sys.horizon();
  RiccatiSolution out;
  out.P.resize(T + 1);
  out.K.resize(T);
  out.P[T] = sys.Q[T];
  for (int t = T - 1; t >= 0; --t) {
    const Matrix& A = sys.A[t];
    const Matrix& B = sys.B[t];
    const Matrix& Pn = out.P[t + 1];
    const Matrix BtP = B.transpose() * Pn;
    const SymMatrix S(sys.R[t] + BtP * B);
    Matrix K;
    try {
      K = -spd_solve(S, BtP * A);
    } catch (const Error& e) {
      throw Error(e.kind(), "riccati_backward at stage " + std::to_string(t) +
                                ": " + e.what());
    }
    // A^T P A + Q - A^T P B (R + B^T P B)^{-1} B^T P A, written with K.
    out.P[t] = symmetrize(A.transpose() * Pn * A + sys.Q[t] +
                          (BtP * A).transpose() * K);
    out.K[t] = std::move(K);
  }
  return out;
}

KalmanSolution kalman_forward(const TimeVaryingSystem& sys,
                              const CovarianceProfile& cov) {
  sys.validate();
  cov.validate(sys);
  const int T = sys.horizon();
  KalmanSolution out;
  out.Sigma.resize(T);
  out.L.resize(T);
  out.SigmaPred.resize(T + 1);
  out.SigmaPred[0] = cov.X0;
  for (int t = 0; t < T; ++t) {
    const Matrix& Cm = sys.C[t];
    const Matrix& S = out.SigmaPred[t];
    const SymMatrix V(cov.V[t]);
    DRLQG_THROW_UNLESS(min_eigenvalue(V) > 0.0, ErrorKind::kNotPsd,
                       "kalman_forward: V[" + std::to_string(t) +
                           "] is not positive definite");
    const SymMatrix M(Cm * S * Cm.transpose() + V.mat());
    const Matrix CS = Cm * S;
    Matrix gain_t;  // (C S C^T + V)^{-1} C S
    try {
      gain_t = spd_solve(M, CS);
    } catch (const Error& e) {
      throw Error(e.kind(), "kalman_forward at stage " + std::to_string(t) +
                                ": " + e.what());
    }
    out.Sigma[t] = symmetrize(S - CS.transpose() * gain_t);
    out.L[t] = spd_solve(V, Cm * out.Sigma[t]).transpose();
    out.SigmaPred[t + 1] =
        symmetrize(sys.A[t] * out.Sigma[t] * sys.A[t].transpose() + cov.W[t]);
  }
  return out;
}

double lqg_value(const TimeVaryingSystem& sys, const CovarianceProfile& cov,
                 const RiccatiSolution& ric, const KalmanSolution& kal) {
  const int T = sys.horizon();
  double value = (ric.P[0] * cov.X0).trace();
  for (int t = 0; t < T; ++t) {
    value += ((sys.Q[t] - ric.P[t]) * kal.Sigma[t]).trace();
    value += (ric.P[t + 1] * kal.SigmaPred[t + 1]).trace();
  }
  return value;
}

double lqg_value(const TimeVaryingSystem& sys, const CovarianceProfile& cov) {
  const RiccatiSolution ric = riccati_backward(sys);
  const KalmanSolution kal = kalman_forward(sys, cov);
  return lqg_value(sys, cov, ric, kal);
}

KalmanController assemble_controller(const TimeVaryingSystem& sys,
                                     const CovarianceProfile& cov) {
  return KalmanController{sys, riccati_backward(sys), kalman_forward(sys, cov)};
}

TimeVaryingSystem scalar_ones_system() {
  const Matrix one = Matrix::Ones(1, 1);
  return TimeVaryingSystem{{one}, {one}, {one}, {one, one}, {one}};
}

CovarianceProfile scalar_ones_covariance() {
  const Matrix one = Matrix::Ones(1, 1);
  return CovarianceProfile{one, {one}, {one}};
}

}  // namespace drlqg
