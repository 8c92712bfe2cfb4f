#pragma once

#include <optional>
#include <vector>

#include "gnp/composite.hpp"
#include "gnp/tensor_sensing.hpp"

namespace gnp {

// ---- finite differences -------------------------------------------------

struct FdReport {
  // Rejected: some residual sits within 1e-6 of zero, or a probe X +- h e_k
  // crossed a kink of the l1 penalty. Error fields are NaN when rejected.
  bool kink = false;
  double min_abs_residual = 0.0;
  // ||g - g_fd||_F / ||g||_F
  double rel_error = kMissing;
  // max_k |g_k - g_fd,k| / max_k |g_k|
  double max_rel_error = kMissing;
};

FdReport fd_pullback_check(const TensorSensingInstance& inst, const DenseMatrix& x, double h_step);

// Draws points uniformly in the radius-ball around X* until one is kink-free
// (at most max_tries draws) and checks it. The returned report is the last one
// computed, so kink == true means every draw was rejected.
FdReport fd_pullback_check_sampled(const TensorSensingInstance& inst, RandomStream& stream,
                                   double radius, double h_step, int max_tries = 20);

// ---- constant rank ------------------------------------------------------

inline constexpr Eigen::Index kMaxDenseUnknowns = 2000;

struct RankReport {
  int rank = 0;
  // Gram eigenvalues (= squared Jacobian singular values), nonincreasing.
  Vector eigenvalues;
  // lambda_rank / lambda_{rank+1}; +inf when the Gram operator is nonsingular
  // or the trailing eigenvalue is exactly zero.
  double gap_ratio = 0.0;
  // Rank differs between rel_tol 1e-10 and 1e-6, or gap_ratio < 1e3.
  bool ambiguous = false;
  // Candidate closed forms printed beside the measurement.
  long formula_half_r_r_plus_1 = 0;    // r(r+1)/2
  long formula_dr_minus_skew = 0;      // d r - r(r-1)/2
};

// Densifies grad c(X)^T grad c(X) on coordinate directions and counts the
// eigenvalues above rel_tol * largest. Throws std::invalid_argument beyond
// kMaxDenseUnknowns unknowns.
RankReport rank_report(const DenseMatrix& x, int n, double rel_tol);
int numerical_rank(const TensorSensingInstance& inst, const DenseMatrix& x, double rel_tol);

// ---- sharpness ----------------------------------------------------------

struct SharpnessEstimate {
  double mu_h = kMissing;
  double lipschitz_h = kMissing;
  // (objective(X) - h_ref) / image_distance(X) for every kept sample.
  std::vector<double> ratios;
  std::vector<double> distances;
  std::vector<double> excesses;
  int skipped = 0;
};

// Samples X uniformly in the radius-ball around X*, h_ref = ||noise||_1.
// The solution-set surrogate is {c(X*)}.
SharpnessEstimate estimate_sharpness(const TensorSensingInstance& inst, RandomStream& stream,
                                     int samples, double radius);

// ---- theory constants ---------------------------------------------------

struct ConstantInputs {
  double mu_h = 0.0;
  double lipschitz_h = 0.0;
  double mu_c = 0.0;
  double lipschitz_grad_c = 0.0;
  double lipschitz_c = 0.0;
  double curvature_c = 0.0;  // C
  double radius = 0.0;       // R
};

struct TheoryConstants {
  ConstantInputs inputs;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double delta = 0.0;
  double eta = 0.0;
  std::optional<long> predicted_T;
};

// c1 = sqrt(1 - mu_h^2 / (2 L_h^2)), c2 = 8 L_gc L_h^2 / (9 mu_c^2 mu_h^2),
// c3 = 4 L_h / (3 mu_c mu_h), eta = min{R, mu_h / (16 L_h L_c C)} and
// delta = min{R/2, mu_h / (32 L_h L_c C), (1 - c1) / (2 c2 L_c), eta (1 - c1) / (4 c3 L_c)}.
TheoryConstants derive_constants(const ConstantInputs& in);

// ---- rate report --------------------------------------------------------

struct RateReport {
  // exp(slope) of the least-squares line through log a_t.
  double fitted_factor = kMissing;
  int fitted_points = 0;
  double c1 = kMissing;
  bool factor_within_c1 = false;
  // Smallest c >= 0 with a_{t+1} <= 0.999 a_t + c a_t^2 along the trace.
  double envelope_c = kMissing;
  double a0 = kMissing;
  double eps = kMissing;
  std::optional<long> predicted_T;
  std::optional<int> observed_iterations;
  // Iterations whose logged aiming value fell below
  // (3/4) max{h - h*, mu_h a_t}.
  std::vector<int> aiming_violations;
  int aiming_checked = 0;
};

// eps: target objective gap for the predicted/observed comparison; defaults to
// the smallest gap on the trace. mu_h enables the aiming check.
RateReport rate_report(const RunRecord& trace, const TheoryConstants& constants,
                       std::optional<double> eps = std::nullopt,
                       std::optional<double> mu_h = std::nullopt);

}  // namespace gnp
