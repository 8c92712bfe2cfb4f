#pragma once

#include <vector>

#include "gnp/composite.hpp"

namespace gnp {

struct StepInfo {
  double step_size = 0.0;
  // ||P_range(grad c) v||^2 (GNP); ||W||^2 (Polyak); <W, W (X^T X)^{-1}> (ScaledSM).
  double proj_norm_sq = 0.0;
  double h_value = 0.0;
  int cg_iters = 0;
  double cg_residual = 0.0;
  double proj_identity_err = 0.0;
  unsigned flags = kNone;
};

struct StepResult {
  DenseMatrix x_next;
  DenseMatrix direction;
  StepInfo info;
};

// One Gauss-Newton-Polyak step x+ = x - gamma grad c(x)^+ v with
// gamma = theta (h - h_ref) / ||P v||^2 and theta = cfg.step_fraction.
StepResult gnp_step(const CompositeOracle& oracle, const DenseMatrix& x, double h_ref,
                    const SolverConfig& cfg);
// Same step from an already evaluated bundle (no oracle call).
StepResult gnp_step(const PullbackBundle& bundle, const DenseMatrix& x, double h_ref,
                    double theta, const SolverConfig& cfg);

struct RestartState {
  int k = 0;
  double h_k = 0.0;
  DenseMatrix y_k;
};

struct RunResult {
  // GNP/Polyak/ScaledSM: argmin of h over the iterates. RGNP/RPolyak: y_K.
  DenseMatrix best;
  RunRecord trace;
  // One entry per completed round (restart methods only); entry k holds h_k
  // and y_k, entry 0 holds h_0 and x0.
  std::vector<RestartState> restarts;
  // Populated only with SolverConfig::keep_iterates; aligned with trace.rows.
  std::vector<DenseMatrix> iterates;

  bool failed() const { return !trace.failure.empty(); }
};

// T steps of GNP with h_ref = h*. Requires oracle.optimal_value().
RunResult gnp(const CompositeOracle& oracle, const DenseMatrix& x0, int T, const SolverConfig& cfg);

// Restarted GNP: K rounds of T steps from x0 with theta = 1/2 and lower bound
// h_k, updated as h_{k+1} = (h_k + h(y_{k+1})) / 2.
RunResult rgnp(const CompositeOracle& oracle, const DenseMatrix& x0, double h0, int T, int K,
               const SolverConfig& cfg);

// Subgradient method with Polyak step (f - f*) / ||W||^2.
RunResult polyak_subgrad(const CompositeOracle& oracle, const DenseMatrix& x0, int T,
                         const SolverConfig& cfg);

// The restart loop of rgnp around half-Polyak inner steps.
RunResult rpolyak(const CompositeOracle& oracle, const DenseMatrix& x0, double h0, int T, int K,
                  const SolverConfig& cfg);

// Scaled subgradient method: D = W (X^T X)^{-1}, gamma = (f - f*) / <W, D>.
RunResult scaled_sm(const CompositeOracle& oracle, const DenseMatrix& x0, int T,
                    const SolverConfig& cfg);

// ceil(log(a0 L_h / eps) / log(2 / (1 + c1))), or 0 when a0 L_h <= eps.
// Throws std::invalid_argument unless c1 in (0, 1) and a0, L_h, eps > 0.
long predicted_T(double c1, double a0, double lipschitz_h, double eps);

}  // namespace gnp
