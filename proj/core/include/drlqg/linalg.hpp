#pragma once

// Dense symmetric / PSD kernels shared by every other part of the library.

#include <span>

#include <Eigen/Core>

namespace drlqg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative threshold below which negative eigenvalues are treated as
/// round-off of a PSD matrix (scaled by the Frobenius norm).
inline constexpr double kPsdRelTol = 1e-9;

/// Square matrix that is exactly symmetric. Construction from an arbitrary
/// square matrix replaces it by (M + M^T) / 2.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Matrix& m);

  static SymMatrix identity(Eigen::Index dim);
  static SymMatrix zero(Eigen::Index dim);

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& mat() const { return m_; }
  operator const Matrix&() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

 private:
  Matrix m_;
};

struct SymEig {
  Vector values;   // ascending
  Matrix vectors;  // orthonormal columns
};

/// Returns (M + M^T) / 2.
Matrix symmetrize(const Matrix& m);

/// Eigendecomposition with a fixed sign convention: the largest-magnitude
/// component of every eigenvector is positive (first one wins on ties).
SymEig sym_eig(const SymMatrix& s);

double min_eigenvalue(const Matrix& s);
double max_eigenvalue(const Matrix& s);

/// Clamps eigenvalues in [-rel_tol * |S|_F, 0) to zero. More negative
/// eigenvalues raise ErrorKind::kNotPsd.
SymMatrix clamp_psd(const SymMatrix& s, double rel_tol = kPsdRelTol);

/// Principal square root of a numerically PSD matrix.
SymMatrix psd_sqrt(const SymMatrix& s);

/// Solves S X = B for symmetric positive definite S.
Matrix spd_solve(const SymMatrix& s, const Matrix& b);

/// True if the smallest eigenvalue is >= -rel_tol * max(1, |S|_F).
bool is_psd(const Matrix& s, double rel_tol = kPsdRelTol);

/// Frobenius inner product <A, B> = Tr(A^T B).
inline double inner(const Matrix& a, const Matrix& b) {
  return (a.array() * b.array()).sum();
}

Matrix block_diag(std::span<const Matrix> blocks);

bool all_finite(const Matrix& m);

}  // namespace drlqg
