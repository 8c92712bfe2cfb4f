#include "gnp/diagnostics.hpp"

#include "gnp/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gnp {
namespace {

constexpr double kKinkThreshold = 1e-6;

bool same_signs(const Vector& a, const Vector& b) {
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    if ((a(j) > 0.0) != (b(j) > 0.0)) return false;
  }
  return true;
}

int count_above(const Vector& eigenvalues, double rel_tol) {
  const double top = eigenvalues.size() > 0 ? eigenvalues(0) : 0.0;
  if (!(top > 0.0)) return 0;
  int count = 0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    if (eigenvalues(i) > rel_tol * top) ++count;
  }
  return count;
}

}  // namespace

FdReport fd_pullback_check(const TensorSensingInstance& inst, const DenseMatrix& x,
                           double h_step) {
  if (!(h_step > 0.0)) throw std::invalid_argument("fd_pullback_check: h_step must be positive");
  FdReport report;
  const Vector rho = measure(inst, x) - inst.b;
  report.min_abs_residual = rho.cwiseAbs().minCoeff();
  if (report.min_abs_residual < kKinkThreshold) {
    report.kink = true;
    return report;
  }

  const DenseMatrix g = subgradient_pullback(inst, x).g;
  DenseMatrix fd(x.rows(), x.cols());
  DenseMatrix probe = x;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      probe(i, j) = x(i, j) + h_step;
      const Vector rho_plus = measure(inst, probe) - inst.b;
      probe(i, j) = x(i, j) - h_step;
      const Vector rho_minus = measure(inst, probe) - inst.b;
      probe(i, j) = x(i, j);
      if (!same_signs(rho, rho_plus) || !same_signs(rho, rho_minus)) {
        report.kink = true;
        return report;
      }
      fd(i, j) = (rho_plus.lpNorm<1>() - rho_minus.lpNorm<1>()) / (2.0 * h_step);
    }
  }
  const double g_norm = g.norm();
  const double g_max = g.cwiseAbs().maxCoeff();
  report.rel_error = g_norm > 0.0 ? (g - fd).norm() / g_norm : (g - fd).norm();
  report.max_rel_error = g_max > 0.0 ? (g - fd).cwiseAbs().maxCoeff() / g_max
                                     : (g - fd).cwiseAbs().maxCoeff();
  return report;
}

FdReport fd_pullback_check_sampled(const TensorSensingInstance& inst, RandomStream& stream,
                                   double radius, double h_step, int max_tries) {
  FdReport report;
  report.kink = true;
  for (int attempt = 0; attempt < max_tries && report.kink; ++attempt) {
    const DenseMatrix x = uniform_in_ball(stream, inst.x_star, radius);
    report = fd_pullback_check(inst, x, h_step);
  }
  return report;
}

RankReport rank_report(const DenseMatrix& x, int n, double rel_tol) {
  const Eigen::Index unknowns = x.size();
  if (unknowns > kMaxDenseUnknowns) {
    throw std::invalid_argument("rank_report: too many unknowns to densify the Gram operator");
  }
  if (!(rel_tol > 0.0)) throw std::invalid_argument("rank_report: rel_tol must be positive");

  const SelfAdjointAction gram = gram_action(x, n);
  DenseMatrix dense(unknowns, unknowns);
  DenseMatrix unit = DenseMatrix::Zero(x.rows(), x.cols());
  for (Eigen::Index k = 0; k < unknowns; ++k) {
    unit(k) = 1.0;
    const DenseMatrix col = gram(unit);
    dense.col(k) = Eigen::Map<const Vector>(col.data(), unknowns);
    unit(k) = 0.0;
  }
  // Symmetrize away roundoff before the eigensolve.
  dense = 0.5 * (dense + dense.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(dense, Eigen::EigenvaluesOnly);

  RankReport report;
  report.eigenvalues = eig.eigenvalues().reverse();
  report.rank = count_above(report.eigenvalues, rel_tol);
  const int loose = count_above(report.eigenvalues, 1e-6);
  const int tight = count_above(report.eigenvalues, 1e-10);
  if (report.rank >= unknowns) {
    report.gap_ratio = std::numeric_limits<double>::infinity();
  } else if (report.rank == 0) {
    report.gap_ratio = 0.0;
  } else {
    const double below = std::max(report.eigenvalues(report.rank), 0.0);
    report.gap_ratio = below > 0.0 ? report.eigenvalues(report.rank - 1) / below
                                   : std::numeric_limits<double>::infinity();
  }
  report.ambiguous = loose != tight || report.gap_ratio < 1e3;
  const long d = x.rows();
  const long r = x.cols();
  report.formula_half_r_r_plus_1 = r * (r + 1) / 2;
  report.formula_dr_minus_skew = d * r - r * (r - 1) / 2;
  return report;
}

int numerical_rank(const TensorSensingInstance& inst, const DenseMatrix& x, double rel_tol) {
  if (x.rows() != inst.params.d || x.cols() != inst.params.r) {
    throw std::invalid_argument("numerical_rank: iterate must be d x r");
  }
  return rank_report(x, inst.params.n, rel_tol).rank;
}

SharpnessEstimate estimate_sharpness(const TensorSensingInstance& inst, RandomStream& stream,
                                     int samples, double radius) {
  if (samples < 1) throw std::invalid_argument("estimate_sharpness: samples must be >= 1");
  const double h_ref = reference_optimal_value(inst);
  SharpnessEstimate est;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const DenseMatrix x = uniform_in_ball(stream, inst.x_star, radius);
    const double dist = image_distance(inst, x);
    if (!(dist > 0.0)) {
      ++est.skipped;
      continue;
    }
    const double excess = objective(inst, x) - h_ref;
    const double ratio = excess / dist;
    est.ratios.push_back(ratio);
    est.distances.push_back(dist);
    est.excesses.push_back(excess);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  if (!est.ratios.empty()) {
    est.mu_h = lo;
    est.lipschitz_h = hi;
  }
  return est;
}

TheoryConstants derive_constants(const ConstantInputs& in) {
  const double values[] = {in.mu_h,        in.lipschitz_h,  in.mu_c, in.lipschitz_grad_c,
                           in.lipschitz_c, in.curvature_c, in.radius};
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("derive_constants: every input must be positive and finite");
    }
  }
  if (in.mu_h > in.lipschitz_h) {
    throw std::invalid_argument("derive_constants: need mu_h <= L_h");
  }
  TheoryConstants out;
  out.inputs = in;
  const double ratio = in.mu_h / in.lipschitz_h;
  out.c1 = std::sqrt(1.0 - 0.5 * ratio * ratio);
  out.c2 = 8.0 * in.lipschitz_grad_c * in.lipschitz_h * in.lipschitz_h /
           (9.0 * in.mu_c * in.mu_c * in.mu_h * in.mu_h);
  out.c3 = 4.0 * in.lipschitz_h / (3.0 * in.mu_c * in.mu_h);
  const double lcc = in.lipschitz_h * in.lipschitz_c * in.curvature_c;
  out.eta = std::min(in.radius, in.mu_h / (16.0 * lcc));
  out.delta = std::min({in.radius / 2.0, in.mu_h / (32.0 * lcc),
                        (1.0 - out.c1) / (2.0 * out.c2 * in.lipschitz_c),
                        out.eta * (1.0 - out.c1) / (4.0 * out.c3 * in.lipschitz_c)});
  return out;
}

RateReport rate_report(const RunRecord& trace, const TheoryConstants& constants,
                       std::optional<double> eps, std::optional<double> mu_h) {
  RateReport report;
  report.c1 = constants.c1;

  // Least-squares fit of log a_t = alpha + t log(rho).
  double sum_t = 0.0, sum_y = 0.0, sum_tt = 0.0, sum_ty = 0.0;
  int count = 0;
  for (std::size_t t = 0; t < trace.rows.size(); ++t) {
    const double a = trace.rows[t].image_dist;
    if (!(a > 0.0) || !std::isfinite(a)) continue;
    const double tt = static_cast<double>(t);
    const double y = std::log(a);
    sum_t += tt;
    sum_y += y;
    sum_tt += tt * tt;
    sum_ty += tt * y;
    ++count;
  }
  report.fitted_points = count;
  if (count >= 2) {
    const double denom = count * sum_tt - sum_t * sum_t;
    if (denom > 0.0) {
      report.fitted_factor = std::exp((count * sum_ty - sum_t * sum_y) / denom);
      report.factor_within_c1 = report.fitted_factor <= constants.c1;
    }
  }

  double envelope = 0.0;
  for (std::size_t t = 0; t + 1 < trace.rows.size(); ++t) {
    const double a = trace.rows[t].image_dist;
    const double a_next = trace.rows[t + 1].image_dist;
    if (!(a > 0.0) || !std::isfinite(a_next)) continue;
    envelope = std::max(envelope, (a_next - 0.999 * a) / (a * a));
  }
  report.envelope_c = envelope;

  if (!trace.rows.empty()) report.a0 = trace.rows.front().image_dist;
  double min_gap = std::numeric_limits<double>::infinity();
  for (const TraceRow& row : trace.rows) {
    if (std::isfinite(row.obj_gap)) min_gap = std::min(min_gap, row.obj_gap);
  }
  report.eps = eps.value_or(min_gap);
  for (const TraceRow& row : trace.rows) {
    if (row.obj_gap <= report.eps) {
      report.observed_iterations = row.iter;
      break;
    }
  }
  if (report.eps > 0.0 && report.a0 > 0.0 && constants.c1 > 0.0 && constants.c1 < 1.0) {
    report.predicted_T = predicted_T(constants.c1, report.a0, constants.inputs.lipschitz_h,
                                     report.eps);
  }

  if (mu_h) {
    for (const TraceRow& row : trace.rows) {
      if (!std::isfinite(row.aiming) || !std::isfinite(row.obj_gap)) continue;
      ++report.aiming_checked;
      const double bound = 0.75 * std::max(row.obj_gap, *mu_h * row.image_dist);
      if (row.aiming < bound) report.aiming_violations.push_back(row.iter);
    }
  }
  return report;
}

}  // namespace gnp
