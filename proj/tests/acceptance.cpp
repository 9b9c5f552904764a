// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit status if
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "drlqg/ambiguity.hpp"
#include "drlqg/error.hpp"
#include "drlqg/frank_wolfe.hpp"
#include "drlqg/gradient.hpp"
#include "drlqg/instance.hpp"
#include "drlqg/saddle.hpp"
#include "drlqg/simulate.hpp"
#include "drlqg/stacked.hpp"
#include "test_support.hpp"

namespace drlqg {
namespace {

using testing::random_instance;
using testing::uniform;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string sci(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

Vector stack(const std::vector<Vector>& parts) {
  Eigen::Index size = 0;
  for (const auto& p : parts) size += p.size();
  Vector out(size);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.segment(at, p.size()) = p;
    at += p.size();
  }
  return out;
}

SymMatrix scalar(double x) { return SymMatrix(Matrix::Constant(1, 1, x)); }

Outcome scalar_suite() {
  const TimeVaryingSystem sys = scalar_ones_system();
  const CovarianceProfile cov = scalar_ones_covariance();
  const RiccatiSolution ric = riccati_backward(sys);
  const KalmanSolution kal = kalman_forward(sys, cov);
  const LinearOutputController u = unroll_kalman(sys, cov);
  const double errs[] = {
      std::abs(ric.P[0](0, 0) - 1.5),  std::abs(ric.K[0](0, 0) + 0.5),
      std::abs(kal.Sigma[0](0, 0) - 0.5), std::abs(lqg_value(sys, cov) - 2.75),
      std::abs(u.U.block(0, 0)(0, 0) + 0.25)};
  const double worst = *std::max_element(std::begin(errs), std::end(errs));
  return {worst <= 1e-12, "P0, K0, Sigma0, f, U' max abs error " + sci(worst) + " (tol 1e-12)"};
}

Outcome gradient_suite() {
  std::mt19937_64 rng(2001);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    auto [sys, cov] = random_instance(3, 5, rng);
    worst = std::max(worst, relative_error(grad_f(sys, cov), fd_grad(sys, cov, 1e-5)));
  }
  return {worst <= 1e-4, "20 instances, max relative Frobenius error " + sci(worst) + " (tol 1e-4)"};
}

Outcome separation_suite() {
  std::mt19937_64 rng(2002);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    auto [sys, cov] = random_instance(4, 6, rng);
    const StackedSystem st = build_stacked(sys);
    const double f = lqg_value(sys, cov);
    const double trace =
        controller_cost_trace(st, output_to_purified(unroll_kalman(sys, cov), st), cov);
    worst = std::max(worst, std::abs(trace - f) / std::abs(f));
  }
  return {worst <= 1e-8, "20 instances, max relative error " + sci(worst) + " (tol 1e-8)"};
}

Outcome oracle_suite() {
  std::mt19937_64 rng(2003);
  double closed_err = 0.0;
  for (int k = 0; k < 50; ++k) {
    const double zhat = uniform(0.1, 5.0, rng);
    const double rho = uniform(0.01, 2.0, rng);
    const double c = uniform(0.01, 10.0, rng);
    const double top = std::pow(std::sqrt(zhat) + rho, 2);
    const OracleResult r =
        oracle_maximize(GelbrichBall(scalar(zhat), rho), scalar(c), scalar(zhat), 0.95);
    closed_err = std::max(closed_err, std::abs(r.maximizer(0, 0) - top));
  }

  double worst_ratio = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 50; ++k) {
    const double zhat = uniform(0.1, 5.0, rng);
    const double rho = uniform(0.01, 2.0, rng);
    const double c = uniform(0.01, 10.0, rng);
    const double top = std::pow(std::sqrt(zhat) + rho, 2);
    const double z = uniform(zhat, top, rng);
    const OracleResult r =
        oracle_maximize(GelbrichBall(scalar(zhat), rho), scalar(c), scalar(z), 0.95);
    double best = -std::numeric_limits<double>::infinity();
    const int points = 100000;
    for (int i = 0; i < points; ++i) {
      const double l = zhat + (top - zhat) * i / (points - 1);
      best = std::max(best, c * (l - z));
    }
    if (best > 0.0) worst_ratio = std::min(worst_ratio, r.gap_contribution / best);
  }

  int infeasible = 0;
  for (int k = 0; k < 200; ++k) {
    const int d = testing::uniform_int(1, 6, rng);
    const GelbrichBall ball(SymMatrix(testing::random_psd(d, rng, uniform(0.05, 1.0, rng))),
                            uniform(0.01, 1.5, rng));
    const SymMatrix g(testing::random_psd(d, rng));
    const SymMatrix ref = k % 2 == 0 ? ball.center() : sample_in_ball(ball, rng);
    if (!ball.contains(oracle_maximize(ball, g, ref, 0.95).maximizer, 1e-8)) ++infeasible;
  }

  const bool pass = closed_err <= 1e-8 && worst_ratio >= 0.95 && infeasible == 0;
  return {pass, "(a) closed form max error " + sci(closed_err) +
                    "; (b) min oracle/grid ratio " + sci(worst_ratio) +
                    " (need >= 0.95); (c) infeasible " + std::to_string(infeasible) + "/200"};
}

Outcome scalar_minimax_suite() {
  const double rho = 0.1;
  const RobustSolution sol =
      solve(scalar_ones_system(), testing::ambiguity_around(scalar_ones_covariance(), rho));
  const double top = (1.0 + rho) * (1.0 + rho);
  const int points = 101;
  double grid = -1.0;
  for (int i = 0; i < points; ++i) {
    for (int j = 0; j < points; ++j) {
      for (int k = 0; k < points; ++k) {
        auto at = [&](int idx) { return 1.0 + (top - 1.0) * idx / (points - 1); };
        grid = std::max(grid, testing::scalar_ones_value(at(i), at(j), at(k)));
      }
    }
  }
  const double rel = std::abs(sol.f_value - grid) / grid;
  return {sol.converged() && rel <= 1e-3,
          "Frank-Wolfe " + sci(sol.f_value) + " vs grid " + sci(grid) + ", relative difference " +
              sci(rel) + " (tol 1e-3)"};
}

Outcome large_instance_suite() {
  const Instance inst = generate_instance(10, 10, 10, 10, 42, 0.1);
  FWConfig cfg;
  cfg.delta = 0.95;
  cfg.tol = 1e-3;
  cfg.max_iter = 200;
  const RobustSolution sol = solve(inst.system, inst.ambiguity, cfg);
  const bool pass = sol.converged() && sol.final_gap <= 1e-3;
  return {pass, "n=m=p=10, T=10, seed 42: gap " + sci(sol.final_gap) + " after " +
                    std::to_string(sol.trace.records.size()) + " iterations (limit 200)"};
}

Outcome saddle_suite() {
  std::string detail;
  bool pass = true;
  auto check = [&](const std::string& name, const TimeVaryingSystem& sys,
                   const AmbiguitySpec& amb, const FWConfig& cfg, std::uint64_t seed,
                   bool expect_clean) {
    const RobustSolution sol = solve(sys, amb, cfg);
    const SaddleReport rep = saddle_check(sys, amb, sol, 100, seed);
    bool ok;
    if (expect_clean) {
      ok = sol.converged() && rep.passed();
    } else {
      ok = !sol.converged() && rep.nature_violations >= 1;
    }
    pass = pass && ok;
    detail += (detail.empty() ? "" : "; ") + name + ": nature " +
              std::to_string(rep.nature_violations) + ", controller " +
              std::to_string(rep.controller_violations) + " violations";
  };
  const Instance inst = generate_instance(3, 3, 3, 4, 11, 0.1);
  const AmbiguitySpec scalar_amb = testing::ambiguity_around(scalar_ones_covariance(), 0.1);
  check("scalar", scalar_ones_system(), scalar_amb, FWConfig{}, 7001, true);
  check("n=m=p=3 T=4", inst.system, inst.ambiguity, FWConfig{}, 7002, true);

  FWConfig one;
  one.max_iter = 1;
  check("truncated scalar (1 iter)", scalar_ones_system(), scalar_amb, one, 7003, false);
  check("truncated 3x3 (1 iter)", inst.system, inst.ambiguity, one, 7004, false);
  FWConfig five;
  five.max_iter = 5;
  five.tol = 1e-6;
  check("truncated 3x3 (5 iter, tol 1e-6)", inst.system, inst.ambiguity, five, 7005, false);
  return {pass, detail};
}

Outcome monte_carlo_suite() {
  std::mt19937_64 rng(2008);
  double worst = 0.0;
  for (int k = 0; k < 5; ++k) {
    auto [sys, cov] = random_instance(3, 4, rng);
    const KalmanController ctrl = assemble_controller(sys, cov);
    const StackedSystem st = build_stacked(sys);
    const double exact =
        controller_cost_trace(st, output_to_purified(unroll_kalman(ctrl), st), cov);
    KalmanPolicy policy(ctrl);
    const MonteCarloEstimate mc = monte_carlo_cost(sys, policy, cov, 100000, 8000 + k);
    worst = std::max(worst, std::abs(mc.mean - exact) / mc.std_error);
  }
  return {worst <= 3.0, "5 instances at N=1e5, max deviation " + sci(worst) +
                            " standard errors (limit 3)"};
}

Outcome structural_suite() {
  std::mt19937_64 rng(2009);
  double eta_err = 0.0;
  for (int k = 0; k < 20; ++k) {
    auto [sys, cov] = random_instance(3, 5, rng);
    const StackedSystem st = build_stacked(sys);
    const NoiseSample noise = sample_noise(sys, cov, rng);
    BlockLowerTriangular u(sys.horizon(), sys.m(), sys.p());
    for (int t = 0; t < sys.horizon(); ++t) {
      for (int s = 0; s <= t; ++s) u.block(t, s) = 0.3 * testing::gaussian(sys.m(), sys.p(), rng);
    }
    const LinearOutputController other{u, testing::gaussian(sys.m() * sys.horizon(), 1, rng)};
    OutputFeedbackPolicy policy(other);
    const Trajectory a = simulate(sys, assemble_controller(sys, cov), noise);
    const Trajectory b = simulate(sys, policy, noise);
    std::vector<Vector> w{noise.x0};
    w.insert(w.end(), noise.w.begin(), noise.w.end());
    const Vector expected = st.D * stack(w) + stack(noise.v);
    const double scale = std::max(1.0, expected.cwiseAbs().maxCoeff());
    const Vector ea = stack(purified_from_rollout(sys, a.u, a.y));
    const Vector eb = stack(purified_from_rollout(sys, b.u, b.y));
    eta_err = std::max(eta_err, (ea - eb).cwiseAbs().maxCoeff() / scale);
    eta_err = std::max(eta_err, (ea - expected).cwiseAbs().maxCoeff() / scale);
  }

  double trip_err = 0.0;
  for (int k = 0; k < 50; ++k) {
    auto [sys, cov] = random_instance(3, 5, rng);
    const StackedSystem st = build_stacked(sys);
    BlockLowerTriangular u(sys.horizon(), sys.m(), sys.p());
    for (int t = 0; t < sys.horizon(); ++t) {
      for (int s = 0; s <= t; ++s) u.block(t, s) = 0.5 * testing::gaussian(sys.m(), sys.p(), rng);
    }
    const LinearPurifiedController p{u, testing::gaussian(sys.m() * sys.horizon(), 1, rng)};
    const auto p_back = output_to_purified(purified_to_output(p, st), st);
    const LinearOutputController o{u, p.q};
    const auto o_back = purified_to_output(output_to_purified(o, st), st);
    const double scale = std::max(1.0, u.dense().cwiseAbs().maxCoeff());
    trip_err = std::max(trip_err, (p_back.U.dense() - u.dense()).cwiseAbs().maxCoeff() / scale);
    trip_err = std::max(trip_err, (o_back.U.dense() - u.dense()).cwiseAbs().maxCoeff() / scale);
  }

  int infeasible = 0;
  double min_gap = std::numeric_limits<double>::infinity();
  bool deterministic = true;
  const std::uint64_t seeds[] = {11, 12, 13};
  for (std::uint64_t seed : seeds) {
    const Instance inst = generate_instance(3, 2, 3, 4, seed, 0.3);
    const auto balls = inst.ambiguity.balls();
    const RobustSolution a =
        solve(inst.system, inst.ambiguity, FWConfig{}, [&](const FWIterate& it) {
          const double scale = std::max(1.0, std::abs(it.f_value));
          min_gap = std::min(min_gap, it.surrogate_gap / scale);
          for (int i = 0; i < it.covariance.num_blocks(); ++i) {
            if (!balls[i].contains(SymMatrix(it.covariance.block(i)), 1e-7)) ++infeasible;
          }
        });
    FWConfig par;
    par.parallel_oracles = true;
    par.threads = 3;
    const RobustSolution b = solve(inst.system, inst.ambiguity);
    const RobustSolution c = solve(inst.system, inst.ambiguity, par);
    deterministic = deterministic && a.trace.to_csv(false) == b.trace.to_csv(false) &&
                    a.trace.to_csv(false) == c.trace.to_csv(false);
  }

  const bool pass = eta_err <= 1e-12 && trip_err <= 1e-10 && infeasible == 0 &&
                    min_gap >= -1e-9 && deterministic;
  return {pass, "eta " + sci(eta_err) + " (1e-12), round trip " + sci(trip_err) +
                    " (1e-10), infeasible iterates " + std::to_string(infeasible) +
                    ", min scaled gap " + sci(min_gap) + " (>= -1e-9), traces " +
                    (deterministic ? "identical" : "DIFFER")};
}

struct Criterion {
  const char* id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace drlqg

int main() {
  using namespace drlqg;
  const std::vector<Criterion> criteria{
      {"AC1", "hand-derived scalar values", 1.0, scalar_suite},
      {"AC2", "gradient vs finite differences", 30.0, gradient_suite},
      {"AC3", "separation principle", 30.0, separation_suite},
      {"AC4", "oracle correctness", 60.0, oracle_suite},
      {"AC5", "scalar minimax vs grid search", 60.0, scalar_minimax_suite},
      {"AC6", "convergence at n=m=p=10, T=10", 600.0, large_instance_suite},
      {"AC7", "saddle-point checks and negative controls", 120.0, saddle_suite},
      {"AC8", "Monte Carlo consistency", 120.0, monte_carlo_suite},
      {"AC9", "structural invariants", 60.0, structural_suite},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget_s) {
      o.pass = false;
      o.detail += "; over time budget";
    }
    if (!o.pass) ++failures;
    std::printf("%s %s: %s | %s | %.2f s (budget %.0f s)\n", o.pass ? "PASS" : "FAIL", c.id,
                c.name, o.detail.c_str(), secs, c.budget_s);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
