#include <gtest/gtest.h>

#include "drlqg/error.hpp"
#include "drlqg/stacked.hpp"
#include "test_support.hpp"

namespace drlqg {
namespace {

using testing::gaussian;
using testing::random_instance;

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

Vector stacked_w_sample(const NoiseSample& s) {
  std::vector<Vector> parts{s.x0};
  parts.insert(parts.end(), s.w.begin(), s.w.end());
  return stack(parts);
}

BlockLowerTriangular random_causal(int T, Eigen::Index r, Eigen::Index c, double scale,
                                   std::mt19937_64& rng) {
  BlockLowerTriangular U(T, r, c);
  for (int t = 0; t < T; ++t) {
    for (int s = 0; s <= t; ++s) U.block(t, s) = scale * gaussian(r, c, rng);
  }
  return U;
}

TEST(BuildStacked, SingleStage) {
  std::mt19937_64 rng(30);
  const TimeVaryingSystem sys = testing::random_system(2, 1, 3, 1, rng);
  const StackedSystem st = build_stacked(sys);
  Matrix G(4, 4);
  G << Matrix::Identity(2, 2), Matrix::Zero(2, 2), sys.A[0], Matrix::Identity(2, 2);
  EXPECT_TRUE((st.G.array() == G.array()).all());
  Matrix H(4, 1);
  H << Matrix::Zero(2, 1), sys.B[0];
  EXPECT_TRUE((st.H.array() == H.array()).all());
  Matrix C(3, 4);
  C << sys.C[0], Matrix::Zero(3, 2);
  EXPECT_TRUE((st.Cs.array() == C.array()).all());
  EXPECT_TRUE((st.D.array() == C.array()).all());
}

TEST(BuildStacked, ZeroDynamicsGivesIdentityG) {
  std::mt19937_64 rng(31);
  TimeVaryingSystem sys = testing::random_system(2, 2, 2, 4, rng);
  for (auto& a : sys.A) a.setZero();
  const StackedSystem st = build_stacked(sys);
  EXPECT_TRUE((st.G.array() == Matrix::Identity(10, 10).array()).all());
}

TEST(BuildStacked, StructureInvariants) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 20; ++trial) {
    auto [sys, cov] = random_instance(3, 5, rng);
    const StackedSystem st = build_stacked(sys);
    const auto n = st.n;
    for (int t = 0; t <= st.T; ++t) {
      EXPECT_TRUE((st.G.block(n * t, n * t, n, n).array() == Matrix::Identity(n, n).array()).all());
      for (int s = t + 1; s <= st.T; ++s) EXPECT_EQ(st.G.block(n * t, n * s, n, n).norm(), 0.0);
    }
    EXPECT_EQ(st.H.topRows(n).norm(), 0.0);
    EXPECT_TRUE((st.D.array() == (st.Cs * st.G).array()).all());
  }
}

TEST(BuildStacked, MatchesRollout) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    auto [sys, cov] = random_instance(3, 5, rng);
    const StackedSystem st = build_stacked(sys);
    const KalmanController ctrl = assemble_controller(sys, cov);
    const NoiseSample noise = sample_noise(sys, cov, rng);
    const Trajectory traj = simulate(sys, ctrl, noise);
    const Vector x = stack(traj.x);
    const Vector predicted = st.G * stacked_w_sample(noise) + st.H * stack(traj.u);
    EXPECT_LE((x - predicted).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, x.cwiseAbs().maxCoeff()));
  }
}

TEST(BlockLowerTriangular, RejectsNonCausalDense) {
  Matrix d = Matrix::Zero(4, 4);
  d(0, 3) = 1.0;
  EXPECT_THROW(BlockLowerTriangular::from_dense(d, 2, 2, 2), Error);
  EXPECT_THROW(BlockLowerTriangular(2, 1, 1).block(0, 1), Error);
}

TEST(Purified, ZeroNoiseAndZeroInput) {
  std::mt19937_64 rng(34);
  auto [sys, cov] = random_instance(3, 4, rng);
  std::vector<Vector> u, y;
  for (int t = 0; t < sys.horizon(); ++t) {
    u.push_back(gaussian(sys.m(), 1, rng));
    y.push_back(gaussian(sys.p(), 1, rng));
  }
  // u = 0: the noise-free copy stays at zero so eta = y.
  std::vector<Vector> zeros;
  for (int t = 0; t < sys.horizon(); ++t) zeros.push_back(Vector::Zero(sys.m()));
  const auto eta = purified_from_rollout(sys, zeros, y);
  for (int t = 0; t < sys.horizon(); ++t) EXPECT_TRUE((eta[t].array() == y[t].array()).all());

  // Zero noise: y is exactly the noise-free output, whatever u is.
  KalmanController ctrl = assemble_controller(sys, cov);
  NoiseSample silent = sample_noise(sys, cov, rng);
  silent.x0.setZero();
  for (auto& w : silent.w) w.setZero();
  for (auto& v : silent.v) v.setZero();
  const Trajectory traj = simulate(sys, ctrl, silent);
  for (const auto& e : purified_from_rollout(sys, traj.u, traj.y)) EXPECT_EQ(e.norm(), 0.0);
}

TEST(Purified, IndependentOfControllerAndEqualToDwPlusV) {
  std::mt19937_64 rng(35);
  for (int trial = 0; trial < 20; ++trial) {
    auto [sys, cov] = random_instance(3, 5, rng);
    const StackedSystem st = build_stacked(sys);
    const NoiseSample noise = sample_noise(sys, cov, rng);
    const KalmanController kalman = assemble_controller(sys, cov);
    const LinearOutputController other{random_causal(sys.horizon(), sys.m(), sys.p(), 0.3, rng),
                                       gaussian(sys.m() * sys.horizon(), 1, rng)};
    OutputFeedbackPolicy other_policy(other);
    const Trajectory a = simulate(sys, kalman, noise);
    const Trajectory b = simulate(sys, other_policy, noise);
    const Vector eta_a = stack(purified_from_rollout(sys, a.u, a.y));
    const Vector eta_b = stack(purified_from_rollout(sys, b.u, b.y));
    const Vector expected = st.D * stacked_w_sample(noise) + stack(noise.v);
    const double scale = std::max(1.0, expected.cwiseAbs().maxCoeff());
    EXPECT_LE((eta_a - eta_b).cwiseAbs().maxCoeff(), 1e-12 * scale);
    EXPECT_LE((eta_a - expected).cwiseAbs().maxCoeff(), 1e-12 * scale);
  }
}

TEST(CostTrace, ZeroControllerIsOpenLoopNoiseCost) {
  std::mt19937_64 rng(36);
  auto [sys, cov] = random_instance(3, 4, rng);
  const StackedSystem st = build_stacked(sys);
  const LinearPurifiedController zero{BlockLowerTriangular(sys.horizon(), sys.m(), sys.p()),
                                      Vector::Zero(sys.m() * sys.horizon())};
  const double expected = (st.G.transpose() * st.Qs * st.G * stacked_w(cov)).trace();
  EXPECT_NEAR(controller_cost_trace(st, zero, cov), expected, 1e-12 * std::abs(expected));
}

TEST(CostTrace, ScalarOnesUnrolledKalman) {
  const TimeVaryingSystem sys = scalar_ones_system();
  const CovarianceProfile cov = scalar_ones_covariance();
  const StackedSystem st = build_stacked(sys);
  const auto u = output_to_purified(unroll_kalman(sys, cov), st);
  EXPECT_NEAR(controller_cost_trace(st, u, cov), 2.75, 1e-12);
}

TEST(CostTrace, MatchesMonteCarloForRandomController) {
  std::mt19937_64 rng(37);
  auto [sys, cov] = random_instance(2, 3, rng);
  const StackedSystem st = build_stacked(sys);
  const LinearPurifiedController ctrl{random_causal(sys.horizon(), sys.m(), sys.p(), 0.3, rng),
                                      0.5 * gaussian(sys.m() * sys.horizon(), 1, rng)};
  PurifiedFeedbackPolicy policy(sys, ctrl);
  const MonteCarloEstimate est = monte_carlo_cost(sys, policy, cov, 20000, 38);
  const double exact = controller_cost_trace(st, ctrl, cov);
  EXPECT_LE(std::abs(est.mean - exact), 3.0 * est.std_error);
}

TEST(GainConversion, ZeroAndSingleStage) {
  std::mt19937_64 rng(39);
  auto [sys, cov] = random_instance(3, 4, rng);
  const StackedSystem st = build_stacked(sys);
  const LinearPurifiedController zero{BlockLowerTriangular(sys.horizon(), sys.m(), sys.p()),
                                      Vector::Zero(sys.m() * sys.horizon())};
  const auto out = purified_to_output(zero, st);
  EXPECT_EQ(out.U.dense().norm(), 0.0);
  EXPECT_EQ(out.q.norm(), 0.0);

  const TimeVaryingSystem one = testing::random_system(2, 2, 2, 1, rng);
  const StackedSystem st1 = build_stacked(one);
  const LinearPurifiedController u{random_causal(1, 2, 2, 1.0, rng), gaussian(2, 1, rng)};
  const auto up = purified_to_output(u, st1);
  EXPECT_TRUE((up.U.dense().array() == u.U.dense().array()).all());
  const auto back = output_to_purified(up, st1);
  EXPECT_TRUE((back.U.dense().array() == u.U.dense().array()).all());
}

TEST(GainConversion, RoundTripsAreIdentities) {
  std::mt19937_64 rng(40);
  for (int seed = 0; seed < 50; ++seed) {
    auto [sys, cov] = random_instance(3, 5, rng);
    const StackedSystem st = build_stacked(sys);
    const LinearPurifiedController u{random_causal(sys.horizon(), sys.m(), sys.p(), 0.5, rng),
                                     gaussian(sys.m() * sys.horizon(), 1, rng)};
    const auto back = output_to_purified(purified_to_output(u, st), st);
    const double scale = std::max(1.0, u.U.dense().cwiseAbs().maxCoeff());
    EXPECT_LE((back.U.dense() - u.U.dense()).cwiseAbs().maxCoeff(), 1e-10 * scale);
    EXPECT_LE((back.q - u.q).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, u.q.norm()));

    const LinearOutputController y{random_causal(sys.horizon(), sys.m(), sys.p(), 0.5, rng),
                                   gaussian(sys.m() * sys.horizon(), 1, rng)};
    const auto y_back = purified_to_output(output_to_purified(y, st), st);
    EXPECT_LE((y_back.U.dense() - y.U.dense()).cwiseAbs().maxCoeff(),
              1e-10 * std::max(1.0, y.U.dense().cwiseAbs().maxCoeff()));
  }
}

TEST(GainConversion, BothFormsDriveIdenticalInputs) {
  std::mt19937_64 rng(41);
  auto [sys, cov] = random_instance(3, 5, rng);
  const StackedSystem st = build_stacked(sys);
  const LinearPurifiedController u{random_causal(sys.horizon(), sys.m(), sys.p(), 0.5, rng),
                                   gaussian(sys.m() * sys.horizon(), 1, rng)};
  const LinearOutputController y = purified_to_output(u, st);
  PurifiedFeedbackPolicy pu(sys, u);
  OutputFeedbackPolicy py(y);
  const NoiseSample noise = sample_noise(sys, cov, rng);
  const Trajectory a = simulate(sys, pu, noise);
  const Trajectory b = simulate(sys, py, noise);
  for (int t = 0; t < sys.horizon(); ++t) {
    EXPECT_LE((a.u[t] - b.u[t]).norm(), 1e-10 * std::max(1.0, a.u[t].norm()));
  }
}

TEST(UnrollKalman, ScalarOnes) {
  const auto u = unroll_kalman(scalar_ones_system(), scalar_ones_covariance());
  EXPECT_NEAR(u.U.block(0, 0)(0, 0), -0.25, 1e-12);
  EXPECT_EQ(u.q(0), 0.0);
}

TEST(UnrollKalman, ZeroGainsGiveZeroMap) {
  std::mt19937_64 rng(42);
  auto [sys, cov] = random_instance(3, 4, rng);
  for (auto& q : sys.Q) q.setZero();
  EXPECT_EQ(unroll_kalman(sys, cov).U.dense().norm(), 0.0);
}

TEST(UnrollKalman, MatchesRecursiveControllerOnSharedNoise) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    auto [sys, cov] = random_instance(4, 6, rng);
    const KalmanController ctrl = assemble_controller(sys, cov);
    const LinearOutputController unrolled = unroll_kalman(ctrl);
    OutputFeedbackPolicy policy(unrolled);
    const NoiseSample noise = sample_noise(sys, cov, rng);
    const Trajectory a = simulate(sys, ctrl, noise);
    const Trajectory b = simulate(sys, policy, noise);
    for (int t = 0; t < sys.horizon(); ++t) {
      EXPECT_LE((a.u[t] - b.u[t]).norm(), 1e-10 * std::max(1.0, a.u[t].norm()));
    }
  }
}

TEST(SeparationPrinciple, TraceCostEqualsLqgValue) {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 20; ++trial) {
    auto [sys, cov] = random_instance(4, 6, rng);
    const StackedSystem st = build_stacked(sys);
    const auto u = output_to_purified(unroll_kalman(sys, cov), st);
    const double f = lqg_value(sys, cov);
    EXPECT_LE(std::abs(controller_cost_trace(st, u, cov) - f), 1e-8 * std::abs(f));
  }
}

TEST(SeparationPrinciple, KalmanControllerIsLocallyMinimal) {
  std::mt19937_64 rng(45);
  auto [sys, cov] = random_instance(3, 4, rng);
  const StackedSystem st = build_stacked(sys);
  const auto u = output_to_purified(unroll_kalman(sys, cov), st);
  const double base = controller_cost_trace(st, u, cov);
  for (int k = 0; k < 50; ++k) {
    LinearPurifiedController p = u;
    const double eps = std::pow(10.0, testing::uniform_int(-4, 0, rng));
    const auto du = random_causal(sys.horizon(), sys.m(), sys.p(), eps, rng);
    for (int t = 0; t < sys.horizon(); ++t) {
      for (int s = 0; s <= t; ++s) p.U.block(t, s) += du.block(t, s);
    }
    p.q += eps * gaussian(sys.m() * sys.horizon(), 1, rng);
    EXPECT_GE(controller_cost_trace(st, p, cov) - base, -1e-9 * std::max(1.0, base));
  }
}

}  // namespace
}  // namespace drlqg
