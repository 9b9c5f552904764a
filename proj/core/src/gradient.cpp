#include "drlqg/gradient.hpp"

#include <cmath>
#include <string>

#include "drlqg/error.hpp"

namespace drlqg {

const Matrix& GradientBlocks::block(int index) const {
  const int T = static_cast<int>(dW.size());
  DRLQG_THROW_UNLESS(index >= 0 && index < 2 * T + 1, ErrorKind::kInvalidInput,
                     "gradient block index out of range");
  if (index == 0) return dX0;
  if (index <= T) return dW[index - 1];
  return dV[index - 1 - T];
}

ValueAndGradient value_and_grad(const TimeVaryingSystem& sys,
                                const CovarianceProfile& cov) {
  const RiccatiSolution ric = riccati_backward(sys);
  const KalmanSolution kal = kalman_forward(sys, cov);
  const int T = sys.horizon();
  const Eigen::Index n = sys.n();

  ValueAndGradient out;
  out.value = lqg_value(sys, cov, ric, kal);
  GradientBlocks& g = out.grad;
  g.dW.resize(T);
  g.dV.resize(T);

  // Adjoint of Sigma_{t|t-1}; the last one only feeds Tr(P_T Sigma_{T|T-1}).
  Matrix bar_pred = ric.P[T];
  for (int t = T - 1; t >= 0; --t) {
    g.dW[t] = symmetrize(bar_pred);
    const Matrix bar_sigma = symmetrize(
        sys.Q[t] - ric.P[t] + sys.A[t].transpose() * bar_pred * sys.A[t]);

    const Matrix& S = kal.SigmaPred[t];
    const Matrix& Cm = sys.C[t];
    const SymMatrix M(Cm * S * Cm.transpose() + cov.V[t]);
    const Matrix gain = spd_solve(M, Cm * S).transpose();  // S C^T M^{-1}
    const Matrix J = Matrix::Identity(n, n) - gain * Cm;

    g.dV[t] = symmetrize(gain.transpose() * bar_sigma * gain);
    bar_pred = symmetrize(ric.P[t] + J.transpose() * bar_sigma * J);
  }
  g.dX0 = bar_pred;
  return out;
}

GradientBlocks grad_f(const TimeVaryingSystem& sys, const CovarianceProfile& cov) {
  return value_and_grad(sys, cov).grad;
}

namespace {

bool definiteness_error(const Error& e) {
  return e.kind() == ErrorKind::kNotPsd || e.kind() == ErrorKind::kSingularMatrix;
}

// d f / d Z_ij along the symmetric direction (e_i e_j^T + e_j e_i^T) / 2.
double central_difference(const TimeVaryingSystem& sys, CovarianceProfile& cov,
                          int block, Eigen::Index i, Eigen::Index j, double step) {
  Matrix& z = cov.block(block);
  const Matrix saved = z;
  auto eval = [&](double h) {
    z = saved;
    z(i, j) += 0.5 * h;
    z(j, i) += 0.5 * h;
    return lqg_value(sys, cov);
  };
  double result = 0.0;
  try {
    result = (eval(step) - eval(-step)) / (2.0 * step);
  } catch (const Error& e) {
    if (!definiteness_error(e)) {
      z = saved;
      throw;
    }
    try {
      const double small = 0.1 * step;
      result = (eval(small) - eval(-small)) / (2.0 * small);
    } catch (const Error& e2) {
      z = saved;
      throw Error(e2.kind(), "fd_grad: block " + std::to_string(block) +
                                 " leaves the PD region even at step " +
                                 std::to_string(0.1 * step) + ": " + e2.what());
    }
  }
  z = saved;
  return result;
}

}  // namespace

GradientBlocks fd_grad(const TimeVaryingSystem& sys, const CovarianceProfile& cov,
                       double step) {
  DRLQG_THROW_UNLESS(step > 0.0 && std::isfinite(step), ErrorKind::kInvalidInput,
                     "fd_grad: step must be positive");
  cov.validate(sys);
  CovarianceProfile work = cov;
  const int T = sys.horizon();
  GradientBlocks g;
  g.dW.resize(T);
  g.dV.resize(T);
  for (int b = 0; b < work.num_blocks(); ++b) {
    const Eigen::Index d = work.block(b).rows();
    Matrix grad(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = i; j < d; ++j) {
        grad(i, j) = grad(j, i) = central_difference(sys, work, b, i, j, step);
      }
    }
    if (b == 0) {
      g.dX0 = std::move(grad);
    } else if (b <= T) {
      g.dW[b - 1] = std::move(grad);
    } else {
      g.dV[b - 1 - T] = std::move(grad);
    }
  }
  return g;
}

double relative_error(const GradientBlocks& a, const GradientBlocks& b) {
  DRLQG_THROW_UNLESS(a.dW.size() == b.dW.size() && a.dV.size() == b.dV.size(),
                     ErrorKind::kDimensionMismatch,
                     "relative_error: gradients have different horizons");
  double num = 0.0;
  double den = 0.0;
  const int blocks = 1 + 2 * static_cast<int>(a.dW.size());
  for (int i = 0; i < blocks; ++i) {
    num += (a.block(i) - b.block(i)).squaredNorm();
    den += b.block(i).squaredNorm();
  }
  if (den == 0.0) return std::sqrt(num);
  return std::sqrt(num / den);
}

}  // namespace drlqg
