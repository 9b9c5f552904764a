#include "drlqg/simulate.hpp"

#include <cmath>
#include <string>

#include "drlqg/error.hpp"

namespace drlqg {

NoiseSample NoiseSample::negated() const {
  NoiseSample out{-x0, w, v};
  for (auto& e : out.w) e = -e;
  for (auto& e : out.v) e = -e;
  return out;
}

KalmanPolicy::KalmanPolicy(const KalmanController& controller)
    : ctrl_(&controller) {}

void KalmanPolicy::reset() {
  xhat_.resize(0);
  last_u_.resize(0);
}

Vector KalmanPolicy::act(int t, const Vector& y) {
  const TimeVaryingSystem& sys = ctrl_->system;
  const auto& L = ctrl_->kalman.L;
  if (t == 0) {
    xhat_ = L[0] * y;
  } else {
    const Vector pred = sys.A[t - 1] * xhat_ + sys.B[t - 1] * last_u_;
    xhat_ = pred + L[t] * (y - sys.C[t] * pred);
  }
  last_u_ = ctrl_->riccati.K[t] * xhat_;
  return last_u_;
}

namespace {

void check_noise(const TimeVaryingSystem& sys, const NoiseSample& noise) {
  const int T = sys.horizon();
  bool ok = noise.x0.size() == sys.n() &&
            static_cast<int>(noise.w.size()) == T &&
            static_cast<int>(noise.v.size()) == T;
  for (int t = 0; ok && t < T; ++t) {
    ok = noise.w[t].size() == sys.n() && noise.v[t].size() == sys.p();
  }
  DRLQG_THROW_UNLESS(ok, ErrorKind::kDimensionMismatch,
                     "noise sample does not match system dimensions");
}

}  // namespace

Trajectory simulate(const TimeVaryingSystem& sys, CausalPolicy& policy,
                    const NoiseSample& noise) {
  check_noise(sys, noise);
  const int T = sys.horizon();
  Trajectory traj;
  traj.x.reserve(T + 1);
  traj.u.reserve(T);
  traj.y.reserve(T);
  policy.reset();
  Vector x = noise.x0;
  for (int t = 0; t < T; ++t) {
    const Vector y = sys.C[t] * x + noise.v[t];
    Vector u = policy.act(t, y);
    DRLQG_THROW_UNLESS(u.size() == sys.m(), ErrorKind::kDimensionMismatch,
                       "policy returned input of size " +
                           std::to_string(u.size()) + " at stage " +
                           std::to_string(t));
    traj.cost += x.dot(sys.Q[t] * x) + u.dot(sys.R[t] * u);
    Vector next = sys.A[t] * x + sys.B[t] * u + noise.w[t];
    traj.x.push_back(std::move(x));
    traj.y.push_back(y);
    traj.u.push_back(std::move(u));
    x = std::move(next);
  }
  traj.cost += x.dot(sys.Q[T] * x);
  traj.x.push_back(std::move(x));
  return traj;
}

Trajectory simulate(const TimeVaryingSystem& sys,
                    const KalmanController& controller,
                    const NoiseSample& noise) {
  KalmanPolicy policy(controller);
  return simulate(sys, policy, noise);
}

NoiseFactors noise_factors(const CovarianceProfile& cov) {
  NoiseFactors f;
  f.x0 = psd_sqrt(SymMatrix(cov.X0)).mat();
  for (const auto& w : cov.W) f.w.push_back(psd_sqrt(SymMatrix(w)).mat());
  for (const auto& v : cov.V) f.v.push_back(psd_sqrt(SymMatrix(v)).mat());
  return f;
}

namespace {

Vector gaussian(Eigen::Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector z(dim);
  for (Eigen::Index i = 0; i < dim; ++i) z(i) = normal(rng);
  return z;
}

}  // namespace

NoiseSample sample_noise(const NoiseFactors& factors, std::mt19937_64& rng) {
  NoiseSample s;
  s.x0 = factors.x0 * gaussian(factors.x0.rows(), rng);
  for (const auto& f : factors.w) s.w.push_back(f * gaussian(f.rows(), rng));
  for (const auto& f : factors.v) s.v.push_back(f * gaussian(f.rows(), rng));
  return s;
}

NoiseSample sample_noise(const TimeVaryingSystem& sys,
                         const CovarianceProfile& cov, std::mt19937_64& rng) {
  cov.validate(sys);
  return sample_noise(noise_factors(cov), rng);
}

MonteCarloEstimate monte_carlo_cost(const TimeVaryingSystem& sys,
                                    CausalPolicy& policy,
                                    const CovarianceProfile& cov, long n,
                                    std::uint64_t seed, bool antithetic) {
  DRLQG_THROW_UNLESS(n >= 2, ErrorKind::kInvalidInput,
                     "monte_carlo_cost needs at least 2 rollouts");
  cov.validate(sys);
  const NoiseFactors factors = noise_factors(cov);
  std::mt19937_64 rng(seed);
  // Welford over independent units: single rollouts or antithetic pairs.
  double mean = 0.0;
  double m2 = 0.0;
  long units = 0;
  const long per_unit = antithetic ? 2 : 1;
  for (long i = 0; i + per_unit <= n; i += per_unit) {
    const NoiseSample s = sample_noise(factors, rng);
    double value = simulate(sys, policy, s).cost;
    if (antithetic) value = 0.5 * (value + simulate(sys, policy, s.negated()).cost);
    ++units;
    const double delta = value - mean;
    mean += delta / static_cast<double>(units);
    m2 += delta * (value - mean);
  }
  const double var = m2 / static_cast<double>(units - 1);
  return {mean, std::sqrt(var / static_cast<double>(units)), units * per_unit};
}

}  // namespace drlqg
