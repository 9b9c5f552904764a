#include "drlqg/ambiguity.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include <Eigen/SVD>

#include "drlqg/error.hpp"

namespace drlqg {

double gelbrich_distance(const SymMatrix& s1, const SymMatrix& s2) {
  DRLQG_THROW_UNLESS(s1.dim() == s2.dim(), ErrorKind::kDimensionMismatch,
                     "gelbrich_distance: dimension mismatch");
  // With A = S1^{1/2}, B = S2^{1/2}: Tr(S1 + S2 - 2 (B S1 B)^{1/2}) equals
  // min over orthogonal R of |A - B R|_F^2, attained at R = U V^T where
  // B A = U diag(s) V^T. The norm form has no cancellation near S1 == S2.
  const Matrix a = psd_sqrt(s1).mat();
  const Matrix b = psd_sqrt(s2).mat();
  Eigen::JacobiSVD<Matrix> svd(b * a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix rotation = svd.matrixU() * svd.matrixV().transpose();
  return (a - b * rotation).norm();
}

GelbrichBall::GelbrichBall(const SymMatrix& center, double radius)
    : center_(center), radius_(radius) {
  DRLQG_THROW_UNLESS(std::isfinite(radius) && radius >= 0.0,
                     ErrorKind::kInvalidInput,
                     "Gelbrich ball radius must be finite and >= 0");
  floor_ = sym_eig(center_).values(0);
  DRLQG_THROW_UNLESS(floor_ >= -kPsdRelTol * std::max(1.0, center_.mat().norm()),
                     ErrorKind::kNotPsd, "Gelbrich ball center is not PSD");
}

bool GelbrichBall::contains(const SymMatrix& z, double tol) const {
  if (z.dim() != dim()) return false;
  if (sym_eig(z).values(0) < floor_ - tol) return false;
  return gelbrich_distance(z, center_) <= radius_ + tol;
}

namespace {

std::string block_name(int i, int T) {
  if (i == 0) return "X0";
  if (i <= T) return "W[" + std::to_string(i - 1) + "]";
  return "V[" + std::to_string(i - 1 - T) + "]";
}

}  // namespace

void AmbiguitySpec::validate(const TimeVaryingSystem& sys) const {
  nominal.validate(sys);
  const int T = sys.horizon();
  DRLQG_THROW_UNLESS(static_cast<int>(rho_w.size()) == T &&
                         static_cast<int>(rho_v.size()) == T,
                     ErrorKind::kDimensionMismatch,
                     "ambiguity radii must have one entry per stage");
  for (int i = 0; i < nominal.num_blocks(); ++i) {
    const double rho = i == 0 ? rho_x0 : (i <= T ? rho_w[i - 1] : rho_v[i - 1 - T]);
    DRLQG_THROW_UNLESS(std::isfinite(rho) && rho >= 0.0,
                       ErrorKind::kInvalidInput,
                       "ambiguity radius of " + block_name(i, T) +
                           " must be finite and >= 0");
    const bool is_v = i > T;
    if (is_v || rho > 0.0) {
      DRLQG_THROW_UNLESS(min_eigenvalue(nominal.block(i)) > 0.0,
                         ErrorKind::kNotPsd,
                         "nominal " + block_name(i, T) +
                             " must be positive definite");
    }
  }
}

GelbrichBall AmbiguitySpec::ball(int index) const {
  const int T = nominal.horizon();
  const double rho =
      index == 0 ? rho_x0 : (index <= T ? rho_w.at(index - 1) : rho_v.at(index - 1 - T));
  return GelbrichBall(SymMatrix(nominal.block(index)), rho);
}

std::vector<GelbrichBall> AmbiguitySpec::balls() const {
  std::vector<GelbrichBall> out;
  out.reserve(nominal.num_blocks());
  for (int i = 0; i < nominal.num_blocks(); ++i) out.push_back(ball(i));
  return out;
}

bool profile_feasible(const AmbiguitySpec& amb, const CovarianceProfile& cov,
                      double tol) {
  if (cov.num_blocks() != amb.nominal.num_blocks()) return false;
  for (int i = 0; i < cov.num_blocks(); ++i) {
    if (!amb.ball(i).contains(SymMatrix(cov.block(i)), tol)) return false;
  }
  return true;
}

OracleDual::OracleDual(const GelbrichBall& ball, const SymMatrix& gradient,
                       const SymMatrix& reference)
    : rho_sq_(ball.radius() * ball.radius()) {
  const SymEig eig = sym_eig(clamp_psd(gradient));
  lambda_ = eig.values.cwiseMax(0.0);
  basis_ = eig.vectors;
  zhat_rot_ = basis_.transpose() * ball.center().mat() * basis_;
  ref_inner_ = inner(reference.mat(), basis_ * lambda_.asDiagonal() * basis_.transpose());
}

double OracleDual::phi(double gamma) const {
  double s = rho_sq_;
  for (Eigen::Index i = 0; i < lambda_.size(); ++i) {
    s += zhat_rot_(i, i) * lambda_(i) / (gamma - lambda_(i));
  }
  return gamma * s - ref_inner_;
}

double OracleDual::dphi(double gamma) const {
  double s = rho_sq_;
  for (Eigen::Index i = 0; i < lambda_.size(); ++i) {
    const double r = lambda_(i) / (gamma - lambda_(i));
    s -= zhat_rot_(i, i) * r * r;
  }
  return s;
}

SymMatrix OracleDual::candidate(double gamma) const {
  const Vector c = gamma / (gamma - lambda_.array());
  const Matrix inner_rot = c.asDiagonal() * zhat_rot_ * c.asDiagonal();
  return SymMatrix(basis_ * inner_rot * basis_.transpose());
}

double OracleDual::gap(double gamma) const {
  double s = 0.0;
  for (Eigen::Index i = 0; i < lambda_.size(); ++i) {
    const double c = gamma / (gamma - lambda_(i));
    s += lambda_(i) * c * c * zhat_rot_(i, i);
  }
  return s - ref_inner_;
}

OracleResult oracle_maximize(const GelbrichBall& ball, const SymMatrix& gradient,
                             const SymMatrix& reference, double delta) {
  DRLQG_THROW_UNLESS(delta > 0.0 && delta < 1.0, ErrorKind::kInvalidInput,
                     "oracle precision delta must lie in (0, 1)");
  DRLQG_THROW_UNLESS(gradient.dim() == ball.dim() && reference.dim() == ball.dim(),
                     ErrorKind::kDimensionMismatch,
                     "oracle_maximize: dimension mismatch");
  if (ball.radius() == 0.0) return {ball.center(), 0.0, 0.0, 0};

  const SymMatrix grad = clamp_psd(gradient);
  const SymEig eig = sym_eig(grad);
  const double lambda1 = std::max(0.0, eig.values(eig.values.size() - 1));
  if (lambda1 == 0.0) return {reference, 0.0, 0.0, 0};

  DRLQG_THROW_UNLESS(ball.floor() > 0.0, ErrorKind::kInvalidInput,
                     "oracle_maximize: ball center must be positive definite");

  const OracleDual dual(ball, grad, reference);
  const Vector p1 = eig.vectors.col(eig.vectors.cols() - 1);
  const double rho = ball.radius();
  const Matrix& zhat = ball.center().mat();
  double lo = lambda1 * (1.0 + std::sqrt(std::max(0.0, p1.dot(zhat * p1))) / rho);
  double hi = lambda1 * (1.0 + std::sqrt(zhat.trace()) / rho);

  // Both ends can coincide with the root (e.g. scalar blocks); widen the
  // upper end until phi' is strictly positive there.
  double widen = std::numeric_limits<double>::epsilon();
  for (int k = 0; k < 64 && !(dual.dphi(hi) > 0.0); ++k) {
    hi *= 1.0 + widen;
    widen *= 2.0;
  }
  DRLQG_THROW_UNLESS(dual.dphi(hi) > 0.0, ErrorKind::kNoConvergence,
                     "oracle_maximize: could not bracket the dual root");

  auto accept = [&](double g, int iters) {
    SymMatrix l = dual.candidate(g);
    const double contribution = inner(grad.mat(), l.mat() - reference.mat());
    return OracleResult{std::move(l), g, contribution, iters};
  };

  int iter = 0;
  while (iter < kMaxBisectionIterations) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;  // bracket exhausted
    ++iter;
    const double d = dual.dphi(mid);
    if (d > 0.0 && dual.gap(mid) >= delta * dual.phi(mid)) return accept(mid, iter);
    if (d > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }

  // hi keeps phi'(hi) > 0, so its candidate is feasible.
  if (dual.gap(hi) >= delta * dual.phi(hi)) return accept(hi, iter);
  const double scale = grad.mat().norm() * zhat.norm();
  if (dual.phi(hi) <= 1e-12 * std::max(scale, 1e-300)) {
    // The reference already maximizes the linearization.
    return {reference, hi, 0.0, iter};
  }
  std::ostringstream msg;
  msg.precision(17);
  msg << "oracle_maximize: bisection did not terminate after " << iter
      << " iterations, bracket [" << lo << ", " << hi << "]";
  throw Error(ErrorKind::kNoConvergence, msg.str());
}

}  // namespace drlqg
