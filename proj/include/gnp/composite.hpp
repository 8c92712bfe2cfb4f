#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gnp/cg.hpp"
#include "gnp/linalg.hpp"

namespace gnp {

// Everything a solver needs at one point x of min h(c(x)).
struct PullbackBundle {
  double h_value = 0.0;
  // grad c(x)^T v for a selected v in the subdifferential of h at c(x).
  DenseMatrix g;
  // Z -> grad c(x)^T grad c(x) Z.
  SelfAdjointAction gram;
};

// Problem side of the solver contract. Subgradient selection lives entirely
// behind pullback(); solvers only ever see the pulled-back g and the Gram action.
class CompositeOracle {
 public:
  virtual ~CompositeOracle() = default;

  virtual Eigen::Index rows() const = 0;
  virtual Eigen::Index cols() const = 0;

  virtual double objective(const DenseMatrix& x) const = 0;
  virtual PullbackBundle pullback(const DenseMatrix& x) const = 0;

  // h*, when known (or a reference value used for reporting gaps).
  virtual std::optional<double> optimal_value() const { return std::nullopt; }
  // dist(c(x), Z*) or a surrogate.
  virtual std::optional<double> image_distance(const DenseMatrix&) const { return std::nullopt; }
  // grad c(x)^T (c(x) - z_hat), used to monitor the aiming inequality.
  virtual std::optional<DenseMatrix> image_difference_pullback(const DenseMatrix&) const {
    return std::nullopt;
  }
};

struct SolverConfig {
  long max_oracle_calls = std::numeric_limits<long>::max();
  std::optional<double> time_budget;  // seconds
  double cg_tol = 1e-10;
  int cg_max_iter = 0;  // <= 0: 4 * unknowns
  // theta in gamma = theta (h - h_ref) / ||P v||^2; Algorithm bracket is [1/2, 1].
  double step_fraction = 1.0;
  std::optional<double> target_objective_gap;
  double critical_norm_floor = 1e-14;
  // Debug: retain every iterate in the run result.
  bool keep_iterates = false;
  // Log <D, grad c^T (c(x) - z_hat)> per step (extra O(d r^2) per step).
  bool record_aiming = false;

  // Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

enum StepFlag : unsigned {
  kNone = 0,
  kNearCritical = 1u << 0,
  kCgFailed = 1u << 1,
  kStepSkipped = 1u << 2,
  kTargetReached = 1u << 3,
  kBudgetExhausted = 1u << 4,
  kFinal = 1u << 5,
  kFailure = 1u << 6,
};

// "near_critical|cg_failed" style rendering, empty for kNone.
std::string flags_to_string(unsigned flags);

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

struct TraceRow {
  int restart_k = 0;
  int iter = 0;
  long oracle_calls = 0;
  double time_sec = 0.0;
  double h_value = 0.0;
  double obj_gap = kMissing;
  double image_dist = kMissing;
  double step_size = kMissing;
  double proj_norm_sq = kMissing;
  int cg_iters = 0;
  double cg_residual = kMissing;
  // |<g, D> - <gram(D), D>| / <g, D>
  double proj_identity_err = kMissing;
  double aiming = kMissing;
  unsigned flags = kNone;
};

struct RunMetadata {
  std::string method;
  std::uint64_t seed = 0;
  int n = 0;
  int d = 0;
  int r = 0;
  int m = 0;
  double kappa = kMissing;
  double pfail = kMissing;
};

struct RunRecord {
  RunMetadata meta;
  std::vector<TraceRow> rows;
  std::string failure;  // empty unless the solver aborted

  // First oracle-call count at which obj_gap <= threshold, if any.
  std::optional<long> calls_to_gap(double threshold) const;
  std::optional<double> seconds_to_gap(double threshold) const;
  double best_h() const;
};

// Index of the smallest recorded objective, earliest on ties.
std::size_t best_index(const RunRecord& trace);

// The stored iterate matching best_index(trace). iterates[i] must correspond to
// trace.rows[i].
DenseMatrix best_iterate(const RunRecord& trace, const std::vector<DenseMatrix>& iterates);

}  // namespace gnp
