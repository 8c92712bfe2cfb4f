#include "gnp/solvers.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace gnp {
namespace {

using Clock = std::chrono::steady_clock;

// Direction rule shared by the run loop: fills direction, step and info from
// the bundle at x. Returning with kFailure set in info.flags aborts the run.
using StepRule = std::function<StepResult(const PullbackBundle&, const DenseMatrix&, double)>;

struct RunState {
  const CompositeOracle& oracle;
  const SolverConfig& cfg;
  Clock::time_point start = Clock::now();
  long calls = 0;
  bool stop_all = false;
  RunResult result;

  double elapsed() const {
    return std::chrono::duration<double>(Clock::now() - start).count();
  }
};

// Runs up to T steps from x0 against h_ref and returns the round's best iterate.
// Rows are appended to state.result.trace; state.stop_all is raised when a
// global stop (budget, time, target, near-criticality, failure) fires.
DenseMatrix run_round(RunState& state, const DenseMatrix& x0, int T, double h_ref, int restart_k,
                      const StepRule& rule) {
  const std::optional<double> h_star = state.oracle.optimal_value();
  const SolverConfig& cfg = state.cfg;
  RunRecord& trace = state.result.trace;

  DenseMatrix x = x0;
  DenseMatrix best = x0;
  double best_h = std::numeric_limits<double>::infinity();

  for (int t = 0;; ++t) {
    if (state.calls >= cfg.max_oracle_calls) {
      if (!trace.rows.empty()) trace.rows.back().flags |= kBudgetExhausted;
      state.stop_all = true;
      break;
    }
    const PullbackBundle bundle = state.oracle.pullback(x);
    ++state.calls;

    TraceRow row;
    row.restart_k = restart_k;
    row.iter = t;
    row.oracle_calls = state.calls;
    row.h_value = bundle.h_value;
    if (h_star) row.obj_gap = bundle.h_value - *h_star;
    if (auto dist = state.oracle.image_distance(x)) row.image_dist = *dist;
    if (cfg.keep_iterates) state.result.iterates.push_back(x);

    if (bundle.h_value < best_h) {
      best_h = bundle.h_value;
      best = x;
    }

    auto finish_row = [&](unsigned flags) {
      row.flags |= flags;
      row.time_sec = state.elapsed();
      trace.rows.push_back(row);
    };

    if (cfg.target_objective_gap && h_star && row.obj_gap <= *cfg.target_objective_gap) {
      finish_row(kTargetReached);
      state.stop_all = true;
      break;
    }
    if (t >= T) {
      finish_row(kFinal);
      break;
    }
    if (cfg.time_budget && state.elapsed() >= *cfg.time_budget) {
      finish_row(kBudgetExhausted);
      state.stop_all = true;
      break;
    }
    if (state.calls >= cfg.max_oracle_calls) {
      finish_row(kBudgetExhausted);
      state.stop_all = true;
      break;
    }

    StepResult step = rule(bundle, x, h_ref);
    row.step_size = step.info.step_size;
    row.proj_norm_sq = step.info.proj_norm_sq;
    row.cg_iters = step.info.cg_iters;
    row.cg_residual = step.info.cg_residual;
    row.proj_identity_err = step.info.proj_identity_err;
    if (cfg.record_aiming && step.direction.size() > 0) {
      if (auto pulled = state.oracle.image_difference_pullback(x)) {
        row.aiming = frobenius_inner(step.direction, *pulled);
      }
    }
    finish_row(step.info.flags);

    if (step.info.flags & kFailure) {
      state.result.trace.failure = "step failed at restart " + std::to_string(restart_k) +
                                   ", iteration " + std::to_string(t);
      state.stop_all = true;
      break;
    }
    if (step.info.flags & kNearCritical) {
      state.stop_all = true;
      break;
    }
    // A skipped step leaves x unchanged, so the rest of the round would repeat it.
    if (step.info.flags & kStepSkipped) break;
    x = std::move(step.x_next);
  }
  return best;
}

void require_optimal_value(const CompositeOracle& oracle, const char* who) {
  if (!oracle.optimal_value()) {
    throw std::invalid_argument(std::string(who) + ": oracle has no optimal value");
  }
}

void require_shape(const CompositeOracle& oracle, const DenseMatrix& x0, const char* who) {
  if (x0.rows() != oracle.rows() || x0.cols() != oracle.cols()) {
    throw std::invalid_argument(std::string(who) + ": initial point has the wrong shape");
  }
}

RunResult single_run(const CompositeOracle& oracle, const DenseMatrix& x0, int T,
                     const SolverConfig& cfg, const StepRule& rule, const char* who) {
  cfg.validate();
  require_optimal_value(oracle, who);
  require_shape(oracle, x0, who);
  if (T < 0) throw std::invalid_argument(std::string(who) + ": T must be nonnegative");
  RunState state{oracle, cfg};
  state.result.best = run_round(state, x0, T, *oracle.optimal_value(), 0, rule);
  return std::move(state.result);
}

RunResult restarted_run(const CompositeOracle& oracle, const DenseMatrix& x0, double h0, int T,
                        int K, const SolverConfig& cfg, const StepRule& rule, const char* who) {
  cfg.validate();
  require_shape(oracle, x0, who);
  if (T < 0 || K < 1) throw std::invalid_argument(std::string(who) + ": need T >= 0, K >= 1");
  RunState state{oracle, cfg};
  double h_k = h0;
  DenseMatrix y = x0;
  state.result.restarts.push_back({0, h0, x0});
  for (int k = 0; k < K && !state.stop_all; ++k) {
    const std::size_t first_row = state.result.trace.rows.size();
    y = run_round(state, x0, T, h_k, k, rule);
    double h_y = std::numeric_limits<double>::infinity();
    for (std::size_t i = first_row; i < state.result.trace.rows.size(); ++i) {
      h_y = std::min(h_y, state.result.trace.rows[i].h_value);
    }
    if (!std::isfinite(h_y)) break;  // round produced no evaluation
    h_k = 0.5 * (h_k + h_y);
    state.result.restarts.push_back({k + 1, h_k, y});
  }
  state.result.best = std::move(y);
  return std::move(state.result);
}

StepResult polyak_rule(const PullbackBundle& bundle, const DenseMatrix& x, double h_ref,
                       double theta, const SolverConfig& cfg) {
  StepResult step;
  step.info.h_value = bundle.h_value;
  const double excess = bundle.h_value - h_ref;
  if (excess <= 0.0) {
    step.info.flags |= kStepSkipped;
    step.x_next = x;
    return step;
  }
  const double norm_sq = bundle.g.squaredNorm();
  step.info.proj_norm_sq = norm_sq;
  if (norm_sq < cfg.critical_norm_floor) {
    step.info.flags |= kNearCritical;
    step.x_next = x;
    return step;
  }
  step.info.step_size = theta * excess / norm_sq;
  step.direction = bundle.g;
  step.x_next = x - step.info.step_size * bundle.g;
  return step;
}

StepResult scaled_rule(const PullbackBundle& bundle, const DenseMatrix& x, double h_ref,
                       const SolverConfig& cfg) {
  StepResult step;
  step.info.h_value = bundle.h_value;
  step.x_next = x;
  const double excess = bundle.h_value - h_ref;
  if (excess <= 0.0) {
    step.info.flags |= kStepSkipped;
    return step;
  }
  const DenseMatrix xtx = x.transpose() * x;
  Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(xtx);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 1e-14 * std::max(hi, 1.0))) {
    step.info.flags |= kFailure;
    return step;
  }
  const DenseMatrix direction = eig.eigenvectors() *
                                eig.eigenvalues().cwiseInverse().asDiagonal() *
                                eig.eigenvectors().transpose();
  step.direction = bundle.g * direction;
  const double metric = frobenius_inner(bundle.g, step.direction);
  step.info.proj_norm_sq = metric;
  if (metric < cfg.critical_norm_floor) {
    step.info.flags |= kNearCritical;
    return step;
  }
  step.info.step_size = excess / metric;
  step.x_next = x - step.info.step_size * step.direction;
  return step;
}

}  // namespace

StepResult gnp_step(const PullbackBundle& bundle, const DenseMatrix& x, double h_ref,
                    double theta, const SolverConfig& cfg) {
  StepResult step;
  step.info.h_value = bundle.h_value;
  step.x_next = x;
  const double excess = bundle.h_value - h_ref;
  if (excess <= 0.0) {
    step.info.flags |= kStepSkipped;
    return step;
  }
  const CgResult cg = cg_min_norm(bundle.gram, bundle.g, {cfg.cg_tol, cfg.cg_max_iter});
  step.info.cg_iters = cg.iterations;
  step.info.cg_residual = cg.rel_residual;
  if (!cg.converged) step.info.flags |= kCgFailed;

  // Two routes to ||P_range v||^2: <g, D> and <gram(D), D>.
  const double via_rhs = frobenius_inner(bundle.g, cg.solution);
  const double via_gram = frobenius_inner(bundle.gram(cg.solution), cg.solution);
  const double proj = 0.5 * (via_rhs + via_gram);
  step.info.proj_norm_sq = proj;
  step.info.proj_identity_err =
      via_rhs != 0.0 ? std::abs(via_rhs - via_gram) / std::abs(via_rhs) : 0.0;
  if (!(proj >= cfg.critical_norm_floor)) {
    step.info.flags |= kNearCritical;
    return step;
  }
  step.info.step_size = theta * excess / proj;
  step.direction = cg.solution;
  step.x_next = x - step.info.step_size * cg.solution;
  return step;
}

StepResult gnp_step(const CompositeOracle& oracle, const DenseMatrix& x, double h_ref,
                    const SolverConfig& cfg) {
  cfg.validate();
  return gnp_step(oracle.pullback(x), x, h_ref, cfg.step_fraction, cfg);
}

RunResult gnp(const CompositeOracle& oracle, const DenseMatrix& x0, int T,
              const SolverConfig& cfg) {
  const double theta = cfg.step_fraction;
  return single_run(
      oracle, x0, T, cfg,
      [&](const PullbackBundle& b, const DenseMatrix& x, double h_ref) {
        return gnp_step(b, x, h_ref, theta, cfg);
      },
      "gnp");
}

RunResult rgnp(const CompositeOracle& oracle, const DenseMatrix& x0, double h0, int T, int K,
               const SolverConfig& cfg) {
  return restarted_run(
      oracle, x0, h0, T, K, cfg,
      [&](const PullbackBundle& b, const DenseMatrix& x, double h_ref) {
        return gnp_step(b, x, h_ref, 0.5, cfg);
      },
      "rgnp");
}

RunResult polyak_subgrad(const CompositeOracle& oracle, const DenseMatrix& x0, int T,
                         const SolverConfig& cfg) {
  return single_run(
      oracle, x0, T, cfg,
      [&](const PullbackBundle& b, const DenseMatrix& x, double h_ref) {
        return polyak_rule(b, x, h_ref, 1.0, cfg);
      },
      "polyak");
}

RunResult rpolyak(const CompositeOracle& oracle, const DenseMatrix& x0, double h0, int T, int K,
                  const SolverConfig& cfg) {
  return restarted_run(
      oracle, x0, h0, T, K, cfg,
      [&](const PullbackBundle& b, const DenseMatrix& x, double h_ref) {
        return polyak_rule(b, x, h_ref, 0.5, cfg);
      },
      "rpolyak");
}

RunResult scaled_sm(const CompositeOracle& oracle, const DenseMatrix& x0, int T,
                    const SolverConfig& cfg) {
  return single_run(
      oracle, x0, T, cfg,
      [&](const PullbackBundle& b, const DenseMatrix& x, double h_ref) {
        return scaled_rule(b, x, h_ref, cfg);
      },
      "scaled_sm");
}

long predicted_T(double c1, double a0, double lipschitz_h, double eps) {
  if (!(c1 > 0.0 && c1 < 1.0)) throw std::invalid_argument("predicted_T: c1 must lie in (0, 1)");
  if (!(a0 > 0.0 && lipschitz_h > 0.0 && eps > 0.0)) {
    throw std::invalid_argument("predicted_T: a0, L_h and eps must be positive");
  }
  const double ratio = a0 * lipschitz_h / eps;
  if (ratio <= 1.0) return 0;
  return static_cast<long>(std::ceil(std::log(ratio) / std::log(2.0 / (1.0 + c1))));
}

}  // namespace gnp
