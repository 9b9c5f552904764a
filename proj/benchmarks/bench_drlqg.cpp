#include <benchmark/benchmark.h>

#include <random>

#include "drlqg/ambiguity.hpp"
#include "drlqg/frank_wolfe.hpp"
#include "drlqg/gradient.hpp"
#include "drlqg/instance.hpp"
#include "drlqg/stacked.hpp"

namespace {

using namespace drlqg;

Instance square_instance(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  const int T = static_cast<int>(state.range(1));
  return generate_instance(d, d, d, T, 42, 0.1);
}

void BM_Riccati(benchmark::State& state) {
  const Instance inst = square_instance(state);
  for (auto _ : state) benchmark::DoNotOptimize(riccati_backward(inst.system));
}
BENCHMARK(BM_Riccati)->Args({10, 10})->Args({10, 50})->Args({30, 10});

void BM_Kalman(benchmark::State& state) {
  const Instance inst = square_instance(state);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kalman_forward(inst.system, inst.ambiguity.nominal));
  }
}
BENCHMARK(BM_Kalman)->Args({10, 10})->Args({10, 50})->Args({30, 10});

void BM_ValueAndGradient(benchmark::State& state) {
  const Instance inst = square_instance(state);
  for (auto _ : state) {
    benchmark::DoNotOptimize(value_and_grad(inst.system, inst.ambiguity.nominal));
  }
}
BENCHMARK(BM_ValueAndGradient)->Args({10, 10})->Args({10, 50})->Args({30, 10});

void BM_Oracle(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  PortableRng rng(7);
  const GelbrichBall ball(SymMatrix(random_nominal_covariance(d, rng)), 0.1);
  const SymMatrix grad(random_nominal_covariance(d, rng));
  for (auto _ : state) {
    benchmark::DoNotOptimize(oracle_maximize(ball, grad, ball.center(), 0.95));
  }
}
BENCHMARK(BM_Oracle)->Arg(3)->Arg(10)->Arg(30);

void BM_UnrollAndTraceCost(benchmark::State& state) {
  const Instance inst = square_instance(state);
  const StackedSystem st = build_stacked(inst.system);
  for (auto _ : state) {
    const auto u = output_to_purified(unroll_kalman(inst.system, inst.ambiguity.nominal), st);
    benchmark::DoNotOptimize(controller_cost_trace(st, u, inst.ambiguity.nominal));
  }
}
BENCHMARK(BM_UnrollAndTraceCost)->Args({3, 5})->Args({10, 10});

void BM_Solve(benchmark::State& state) {
  const Instance inst = square_instance(state);
  FWConfig cfg;
  cfg.parallel_oracles = state.range(2) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(solve(inst.system, inst.ambiguity, cfg));
}
BENCHMARK(BM_Solve)
    ->Args({10, 10, 0})
    ->Args({10, 10, 1})
    ->Args({10, 30, 0})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
