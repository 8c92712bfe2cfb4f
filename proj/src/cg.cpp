#include "gnp/cg.hpp"

#include <cmath>
#include <stdexcept>

namespace gnp {

CgResult cg_min_norm(const SelfAdjointAction& gram, const DenseMatrix& rhs,
                     const CgOptions& options) {
  if (rhs.rows() != gram.rows || rhs.cols() != gram.cols) {
    throw std::invalid_argument("cg_min_norm: right-hand side shape mismatch");
  }
  if (!(options.tol > 0.0)) throw std::invalid_argument("cg_min_norm: tol must be positive");
  const int max_iter =
      options.max_iter > 0 ? options.max_iter : static_cast<int>(4 * gram.unknowns());

  CgResult result;
  result.solution = DenseMatrix::Zero(rhs.rows(), rhs.cols());
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) {
    result.converged = true;
    return result;
  }
  const double stop = options.tol * rhs_norm;

  int it = 0;
  DenseMatrix residual = rhs;
  double true_res = rhs_norm;
  // The outer loop restarts from the true residual when the recursively updated
  // one has drifted below the threshold on its own. Restarts keep every iterate
  // in range(G), so the minimum-norm property survives.
  while (true_res > stop && it < max_iter) {
    DenseMatrix direction = residual;
    double rr = residual.squaredNorm();
    const int start = it;
    while (std::sqrt(rr) > stop && it < max_iter) {
      const DenseMatrix gd = gram(direction);
      const double curvature = frobenius_inner(direction, gd);
      // Breakdown: the search direction fell into the kernel.
      if (!(curvature > 0.0)) break;
      const double alpha = rr / curvature;
      result.solution += alpha * direction;
      residual -= alpha * gd;
      const double rr_next = residual.squaredNorm();
      direction = residual + (rr_next / rr) * direction;
      rr = rr_next;
      ++it;
    }
    residual = rhs - gram(result.solution);
    true_res = residual.norm();
    if (it == start) break;
  }
  result.iterations = it;
  result.rel_residual = true_res / rhs_norm;
  result.converged = true_res <= stop;
  return result;
}

}  // namespace gnp
