#include "drlqg/saddle.hpp"

#include <cmath>
#include <sstream>

#include "drlqg/error.hpp"

namespace drlqg {

namespace {

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = normal(rng);
  }
  return out;
}

// Gradient blocks of the linear map P -> cost(u, P) for a fixed purified
// controller with q = 0, in CovarianceProfile block order.
std::vector<Matrix> cost_form_blocks(const StackedSystem& st,
                                     const LinearPurifiedController& ctrl) {
  const Matrix U = ctrl.U.dense();
  const Matrix M = st.Rs + st.H.transpose() * st.Qs * st.H;
  const Matrix UD = U * st.D;
  const Matrix QG = st.Qs * st.G;
  const Matrix w_form = symmetrize(UD.transpose() * M * UD +
                                   2.0 * QG.transpose() * st.H * UD +
                                   st.G.transpose() * QG);
  const Matrix v_form = symmetrize(U.transpose() * M * U);
  std::vector<Matrix> out;
  for (int t = 0; t <= st.T; ++t) out.push_back(w_form.block(st.n * t, st.n * t, st.n, st.n));
  for (int t = 0; t < st.T; ++t) out.push_back(v_form.block(st.p * t, st.p * t, st.p, st.p));
  return out;
}

std::string describe(const char* side, int sample, double excess, double limit) {
  std::ostringstream os;
  os.precision(6);
  os << side << " sample " << sample << ": cost change " << excess
     << " violates bound " << limit;
  return os.str();
}

}  // namespace

SymMatrix sample_in_ball(const GelbrichBall& ball, std::mt19937_64& rng) {
  if (ball.radius() == 0.0) return ball.center();
  const Eigen::Index d = ball.dim();
  const Matrix g = gaussian_matrix(d, d, rng);
  const Matrix e = g * g.transpose();
  const Matrix& zhat = ball.center().mat();
  const double curvature = (zhat * e * e).trace();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const bool boundary = unit(rng) < 0.5;
  const double fraction = boundary ? 1.0 : unit(rng);
  if (!(curvature > 0.0)) return ball.center();
  const double s = ball.radius() * std::sqrt(fraction / curvature);
  const Matrix m = Matrix::Identity(d, d) + s * e;
  return SymMatrix(m * zhat * m);
}

CovarianceProfile sample_profile(const AmbiguitySpec& amb, std::mt19937_64& rng) {
  CovarianceProfile out = amb.nominal;
  for (int i = 0; i < out.num_blocks(); ++i) {
    out.block(i) = sample_in_ball(amb.ball(i), rng).mat();
  }
  return out;
}

SaddleReport saddle_check(const TimeVaryingSystem& sys, const AmbiguitySpec& amb,
                          const RobustSolution& sol, int n_samples,
                          std::uint64_t seed) {
  DRLQG_THROW_UNLESS(n_samples >= 1, ErrorKind::kInvalidInput,
                     "saddle_check needs at least one sample");
  amb.validate(sys);
  sol.worst_case.validate(sys);

  SaddleReport report;
  std::mt19937_64 rng(seed);
  const StackedSystem st = build_stacked(sys);
  const LinearPurifiedController u_star =
      output_to_purified(unroll_kalman(sys, sol.worst_case), st);

  report.f_star = lqg_value(sys, sol.worst_case);
  report.scale = std::max(1.0, std::abs(report.f_star));
  const double gap_bound = sol.converged() ? sol.final_gap : sol.config.tol;
  report.nature_slack = std::max(10.0 * std::max(gap_bound, 0.0), 1e-6 * report.scale);

  report.feasible = profile_feasible(amb, sol.worst_case, 1e-7);
  if (!report.feasible) report.messages.push_back("worst case lies outside the ambiguity set");

  // Nature side. Sample 0 is nature's best response: cost(u*, .) is linear
  // and separable over the blocks, so the oracle solves it block by block.
  const std::vector<GelbrichBall> balls = amb.balls();
  const std::vector<Matrix> forms = cost_form_blocks(st, u_star);
  report.max_nature_excess = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < n_samples; ++k) {
    CovarianceProfile p = sol.worst_case;
    if (k == 0) {
      for (int i = 0; i < p.num_blocks(); ++i) {
        const SymMatrix form(forms[i]);
        if (balls[i].radius() == 0.0 || form.mat().norm() == 0.0) continue;
        const SymMatrix gamma = clamp_psd(form, kGradientPsdRelTol);
        p.block(i) = oracle_maximize(balls[i], gamma, SymMatrix(p.block(i)), 1.0 - 1e-9)
                         .maximizer.mat();
      }
    } else {
      p = sample_profile(amb, rng);
    }
    const double excess = controller_cost_trace(st, u_star, p) - report.f_star;
    report.max_nature_excess = std::max(report.max_nature_excess, excess);
    ++report.nature_samples;
    if (excess > report.nature_slack) {
      ++report.nature_violations;
      report.messages.push_back(describe("nature", k, excess, report.nature_slack));
    }
  }

  // Controller side: causal perturbations at several magnitudes.
  const double tol = 1e-9 * report.scale;
  report.min_controller_change = std::numeric_limits<double>::infinity();
  std::uniform_int_distribution<int> magnitude(-4, 0);
  for (int k = 0; k < n_samples; ++k) {
    const double eps = std::pow(10.0, magnitude(rng));
    LinearPurifiedController perturbed = u_star;
    for (int t = 0; t < st.T; ++t) {
      for (int s = 0; s <= t; ++s) {
        perturbed.U.block(t, s) += eps * gaussian_matrix(st.m, st.p, rng);
      }
    }
    perturbed.q += eps * gaussian_matrix(st.m * st.T, 1, rng);
    const double change = controller_cost_trace(st, perturbed, sol.worst_case) - report.f_star;
    report.min_controller_change = std::min(report.min_controller_change, change);
    ++report.controller_samples;
    if (change < -tol) {
      ++report.controller_violations;
      report.messages.push_back(describe("controller", k, change, -tol));
    }
  }
  return report;
}

}  // namespace drlqg
