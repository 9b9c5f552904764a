#include "drlqg/frank_wolfe.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <exception>
#include <limits>
#include <thread>

#include "drlqg/error.hpp"
#include "drlqg/gradient.hpp"

namespace drlqg {

void FWConfig::validate() const {
  DRLQG_THROW_UNLESS(delta > 0.0 && delta < 1.0, ErrorKind::kInvalidInput,
                     "delta must lie in (0, 1)");
  DRLQG_THROW_UNLESS(tol > 0.0, ErrorKind::kInvalidInput, "tol must be > 0");
  DRLQG_THROW_UNLESS(max_iter >= 1, ErrorKind::kInvalidInput,
                     "max_iter must be >= 1");
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kConverged: return "converged";
    case SolveStatus::kMaxIterations: return "max_iterations";
  }
  return "unknown";
}

std::string FWTrace::to_csv(bool with_timing) const {
  std::string out = with_timing ? "iter,f_value,surrogate_gap,elapsed_ms\n"
                                : "iter,f_value,surrogate_gap\n";
  char buf[128];
  for (const auto& r : records) {
    if (with_timing) {
      std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", r.iter,
                    r.f_value, r.surrogate_gap, r.elapsed_ms);
    } else {
      std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", r.iter, r.f_value,
                    r.surrogate_gap);
    }
    out += buf;
  }
  return out;
}

namespace {

// Runs the 2T+1 independent oracle calls, serially or on worker threads.
// Results land in index order so the caller's reduction does not depend on
// scheduling.
std::vector<OracleResult> run_oracles(const std::vector<GelbrichBall>& balls,
                                      const GradientBlocks& grad,
                                      const CovarianceProfile& iterate,
                                      const FWConfig& cfg) {
  const int blocks = static_cast<int>(balls.size());
  std::vector<OracleResult> results(blocks);
  std::vector<std::exception_ptr> errors(blocks);
  auto work = [&](int i) {
    try {
      const SymMatrix g = clamp_psd(SymMatrix(grad.block(i)), kGradientPsdRelTol);
      results[i] = oracle_maximize(balls[i], g, SymMatrix(iterate.block(i)), cfg.delta);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  unsigned workers = cfg.threads == 0 ? std::thread::hardware_concurrency() : cfg.threads;
  workers = std::min<unsigned>(std::max(workers, 1u), static_cast<unsigned>(blocks));
  if (!cfg.parallel_oracles || workers <= 1) {
    for (int i = 0; i < blocks; ++i) work(i);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int i = static_cast<int>(w); i < blocks; i += static_cast<int>(workers)) work(i);
      });
    }
  }
  for (int i = 0; i < blocks; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
  }
  return results;
}

}  // namespace

RobustSolution solve(const TimeVaryingSystem& sys, const AmbiguitySpec& amb,
                     const FWConfig& cfg, const FWObserver& observer) {
  cfg.validate();
  sys.validate();
  amb.validate(sys);

  const auto start = std::chrono::steady_clock::now();
  const std::vector<GelbrichBall> balls = amb.balls();
  const int blocks = static_cast<int>(balls.size());

  CovarianceProfile iterate = amb.nominal;
  CovarianceProfile best = iterate;
  double best_gap = std::numeric_limits<double>::infinity();
  double best_value = 0.0;
  FWTrace trace;
  std::vector<double> block_gaps(blocks);
  bool converged = false;

  for (int k = 0; k < cfg.max_iter; ++k) {
    const ValueAndGradient vg = value_and_grad(sys, iterate);
    const std::vector<OracleResult> oracle = run_oracles(balls, vg.grad, iterate, cfg);

    double gap = 0.0;
    for (int i = 0; i < blocks; ++i) {
      block_gaps[i] = oracle[i].gap_contribution;
      gap += block_gaps[i];
    }
    const double elapsed =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    trace.records.push_back({k, vg.value, gap, elapsed});
    if (observer) observer(FWIterate{k, iterate, vg.value, gap, block_gaps});

    if (gap < best_gap) {
      best_gap = gap;
      best_value = vg.value;
      best = iterate;
    }
    if (gap <= cfg.tol) {
      converged = true;
      break;
    }

    const double alpha = 2.0 / (2.0 + k);
    for (int i = 0; i < blocks; ++i) {
      Matrix& z = iterate.block(i);
      z = symmetrize((1.0 - alpha) * z + alpha * oracle[i].maximizer.mat());
    }
  }

  RobustSolution sol{best, assemble_controller(sys, best), std::move(trace),
                     best_gap, best_value,
                     converged ? SolveStatus::kConverged : SolveStatus::kMaxIterations,
                     cfg};
  return sol;
}

}  // namespace drlqg
