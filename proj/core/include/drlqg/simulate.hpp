#pragma once

// Closed-loop rollouts of causal controllers on a TimeVaryingSystem. All
// randomness enters through an explicit NoiseSample.

#include <random>
#include <vector>

#include "drlqg/lqg.hpp"

namespace drlqg {

struct NoiseSample {
  Vector x0;
  std::vector<Vector> w;  // w_0..w_{T-1}
  std::vector<Vector> v;  // v_0..v_{T-1}

  NoiseSample negated() const;
};

struct Trajectory {
  std::vector<Vector> x;  // x_0..x_T
  std::vector<Vector> u;  // u_0..u_{T-1}
  std::vector<Vector> y;  // y_0..y_{T-1}
  double cost = 0.0;
};

/// A causal controller: act(t, y_t) is called once per stage in order and
/// may depend on y_0..y_t only. reset() starts a new rollout.
class CausalPolicy {
 public:
  virtual ~CausalPolicy() = default;
  virtual void reset() = 0;
  virtual Vector act(int t, const Vector& y) = 0;
};

/// Runtime state of a KalmanController (the estimate xhat_t).
class KalmanPolicy final : public CausalPolicy {
 public:
  explicit KalmanPolicy(const KalmanController& controller);

  void reset() override;
  Vector act(int t, const Vector& y) override;

 private:
  const KalmanController* ctrl_;
  Vector xhat_;
  Vector last_u_;
};

Trajectory simulate(const TimeVaryingSystem& sys, CausalPolicy& policy,
                    const NoiseSample& noise);

Trajectory simulate(const TimeVaryingSystem& sys,
                    const KalmanController& controller,
                    const NoiseSample& noise);

/// Draws x0 ~ N(0, X0), w_t ~ N(0, W_t), v_t ~ N(0, V_t).
NoiseSample sample_noise(const TimeVaryingSystem& sys,
                         const CovarianceProfile& cov, std::mt19937_64& rng);

/// Factors used by sample_noise; computing them once speeds up long loops.
struct NoiseFactors {
  Matrix x0;
  std::vector<Matrix> w;
  std::vector<Matrix> v;
};

NoiseFactors noise_factors(const CovarianceProfile& cov);
NoiseSample sample_noise(const NoiseFactors& factors, std::mt19937_64& rng);

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long samples = 0;
};

/// Mean closed-loop cost over n rollouts. With `antithetic`, rollouts come in
/// (noise, -noise) pairs and the standard error is computed over pair means.
MonteCarloEstimate monte_carlo_cost(const TimeVaryingSystem& sys,
                                    CausalPolicy& policy,
                                    const CovarianceProfile& cov, long n,
                                    std::uint64_t seed,
                                    bool antithetic = false);

}  // namespace drlqg
