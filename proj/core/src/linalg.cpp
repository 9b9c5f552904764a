#include "drlqg/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "drlqg/error.hpp"

namespace drlqg {

SymMatrix::SymMatrix(const Matrix& m) {
  DRLQG_THROW_UNLESS(m.rows() == m.cols(), ErrorKind::kDimensionMismatch,
                     "symmetric matrix must be square, got " +
                         std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
  DRLQG_THROW_UNLESS(m.rows() >= 1, ErrorKind::kInvalidInput,
                     "symmetric matrix must have dimension >= 1");
  m_ = symmetrize(m);
}

SymMatrix SymMatrix::identity(Eigen::Index dim) {
  return SymMatrix(Matrix::Identity(dim, dim));
}

SymMatrix SymMatrix::zero(Eigen::Index dim) {
  return SymMatrix(Matrix::Zero(dim, dim));
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

bool all_finite(const Matrix& m) { return m.allFinite(); }

SymEig sym_eig(const SymMatrix& s) {
  DRLQG_THROW_UNLESS(all_finite(s.mat()), ErrorKind::kInvalidInput,
                     "sym_eig: non-finite entries");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(s.mat());
  DRLQG_THROW_UNLESS(solver.info() == Eigen::Success, ErrorKind::kInvalidInput,
                     "sym_eig: eigensolver failed");
  SymEig out{solver.eigenvalues(), solver.eigenvectors()};
  for (Eigen::Index j = 0; j < out.vectors.cols(); ++j) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < out.vectors.rows(); ++i) {
      const double a = std::abs(out.vectors(i, j));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (out.vectors(arg, j) < 0.0) out.vectors.col(j) *= -1.0;
  }
  return out;
}

double min_eigenvalue(const Matrix& s) {
  return sym_eig(SymMatrix(s)).values(0);
}

double max_eigenvalue(const Matrix& s) {
  const auto eig = sym_eig(SymMatrix(s));
  return eig.values(eig.values.size() - 1);
}

bool is_psd(const Matrix& s, double rel_tol) {
  const double scale = std::max(1.0, s.norm());
  return min_eigenvalue(s) >= -rel_tol * scale;
}

namespace {

// Eigen pair with negatives in [-tol*|S|_F, 0) zeroed.
SymEig clamped_eig(const SymMatrix& s, double rel_tol, const char* who) {
  SymEig eig = sym_eig(s);
  const double threshold = -rel_tol * s.mat().norm();
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    double& lambda = eig.values(i);
    if (lambda >= 0.0) continue;
    if (lambda < threshold) {
      throw Error(ErrorKind::kNotPsd,
                  std::string(who) + ": eigenvalue " + std::to_string(lambda) +
                      " below tolerance " + std::to_string(threshold));
    }
    lambda = 0.0;
  }
  return eig;
}

}  // namespace

SymMatrix clamp_psd(const SymMatrix& s, double rel_tol) {
  const SymEig eig = clamped_eig(s, rel_tol, "clamp_psd");
  return SymMatrix(eig.vectors * eig.values.asDiagonal() *
                   eig.vectors.transpose());
}

SymMatrix psd_sqrt(const SymMatrix& s) {
  const SymEig eig = clamped_eig(s, kPsdRelTol, "psd_sqrt");
  const Vector roots = eig.values.cwiseSqrt();
  return SymMatrix(eig.vectors * roots.asDiagonal() * eig.vectors.transpose());
}

Matrix spd_solve(const SymMatrix& s, const Matrix& b) {
  DRLQG_THROW_UNLESS(s.dim() == b.rows(), ErrorKind::kDimensionMismatch,
                     "spd_solve: rhs has " + std::to_string(b.rows()) +
                         " rows, matrix has dimension " +
                         std::to_string(s.dim()));
  DRLQG_THROW_UNLESS(all_finite(s.mat()) && all_finite(b),
                     ErrorKind::kInvalidInput, "spd_solve: non-finite entries");
  Eigen::LLT<Matrix> llt(s.mat());
  DRLQG_THROW_UNLESS(llt.info() == Eigen::Success,
                     ErrorKind::kSingularMatrix,
                     "spd_solve: matrix is not positive definite");
  // LLT accepts matrices whose pivots underflow to tiny positives.
  const auto& l = llt.matrixLLT();
  const double dmax = l.diagonal().cwiseAbs().maxCoeff();
  const double dmin = l.diagonal().cwiseAbs().minCoeff();
  DRLQG_THROW_UNLESS(dmin > 0.0 && dmin > 1e-150 * dmax,
                     ErrorKind::kSingularMatrix,
                     "spd_solve: matrix is numerically singular");
  return llt.solve(b);
}

Matrix block_diag(std::span<const Matrix> blocks) {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  for (const auto& b : blocks) {
    rows += b.rows();
    cols += b.cols();
  }
  Matrix out = Matrix::Zero(rows, cols);
  Eigen::Index r = 0;
  Eigen::Index c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

}  // namespace drlqg
