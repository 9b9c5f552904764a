#pragma once

// Gelbrich balls around nominal covariances and the linear maximization
// oracle used by the Frank-Wolfe solver.

#include <vector>

#include "drlqg/lqg.hpp"

namespace drlqg {

/// G(S1, S2) = sqrt(Tr(S1 + S2 - 2 (S2^{1/2} S1 S2^{1/2})^{1/2})).
double gelbrich_distance(const SymMatrix& s1, const SymMatrix& s2);

/// { Z : G(Z, center) <= radius, Z >= lambda_min(center) I }.
class GelbrichBall {
 public:
  GelbrichBall(const SymMatrix& center, double radius);

  const SymMatrix& center() const { return center_; }
  double radius() const { return radius_; }
  double floor() const { return floor_; }
  Eigen::Index dim() const { return center_.dim(); }

  bool contains(const SymMatrix& z, double tol) const;

 private:
  SymMatrix center_;
  double radius_ = 0.0;
  double floor_ = 0.0;
};

/// Nominal covariances plus one radius per block.
struct AmbiguitySpec {
  CovarianceProfile nominal;
  double rho_x0 = 0.0;
  std::vector<double> rho_w;
  std::vector<double> rho_v;

  /// Radii nonnegative, shapes consistent with `sys`, every nominal V_t PD.
  void validate(const TimeVaryingSystem& sys) const;

  /// Ball for block `index` in the order X0, W_0..W_{T-1}, V_0..V_{T-1}.
  GelbrichBall ball(int index) const;
  std::vector<GelbrichBall> balls() const;
};

/// True if every block of `cov` lies in its ball up to `tol`.
bool profile_feasible(const AmbiguitySpec& amb, const CovarianceProfile& cov,
                      double tol);

struct OracleResult {
  SymMatrix maximizer;
  double gamma = 0.0;             // bisection point that produced maximizer
  double gap_contribution = 0.0;  // <Gamma, maximizer - reference>
  int iterations = 0;
};

/// Maximizes <gradient, L - reference> over the floored ball to relative
/// precision delta by bisection on the dual variable gamma.
///
/// Candidates are L(g) = g^2 (g I - Gamma)^{-1} Zhat (g I - Gamma)^{-1}; the
/// dual function is
///   phi(g) = g (rho^2 + <g (g I - Gamma)^{-1} - I, Zhat>) - <reference, Gamma>
/// with derivative phi'(g) = rho^2 - <Zhat, Gamma^2 (g I - Gamma)^{-2}>.
/// The search starts from the bracket
///   [lambda_1 (1 + sqrt(p_1^T Zhat p_1) / rho),
///    lambda_1 (1 + sqrt(Tr Zhat) / rho)]
/// (lambda_1, p_1 the top eigenpair of Gamma) and stops once phi'(g) > 0 and
/// <L(g) - reference, Gamma> >= delta * phi(g).
///
/// Degenerate cases return `reference` with zero gap: radius 0, a gradient
/// that is zero after PSD clamping, or a reference that is already optimal
/// to working precision.
OracleResult oracle_maximize(const GelbrichBall& ball, const SymMatrix& gradient,
                             const SymMatrix& reference, double delta);

/// Evaluations of the dual function used by the oracle, exposed for tests.
struct OracleDual {
  OracleDual(const GelbrichBall& ball, const SymMatrix& gradient,
             const SymMatrix& reference);

  double phi(double gamma) const;
  double dphi(double gamma) const;
  SymMatrix candidate(double gamma) const;
  /// <Gamma, candidate(gamma) - reference>.
  double gap(double gamma) const;

  double lambda_max() const { return lambda_(lambda_.size() - 1); }

 private:
  Vector lambda_;      // clamped eigenvalues of Gamma, ascending
  Matrix basis_;       // eigenvectors of Gamma
  Matrix zhat_rot_;    // basis^T Zhat basis
  double rho_sq_;
  double ref_inner_;   // <reference, Gamma>
};

inline constexpr int kMaxBisectionIterations = 200;

}  // namespace drlqg
