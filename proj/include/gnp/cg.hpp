#pragma once

#include <functional>

#include "gnp/linalg.hpp"

namespace gnp {

// Matrix-free self-adjoint PSD operator acting on rows x cols matrices.
struct SelfAdjointAction {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::function<DenseMatrix(const DenseMatrix&)> apply;

  DenseMatrix operator()(const DenseMatrix& z) const { return apply(z); }
  Eigen::Index unknowns() const { return rows * cols; }
};

struct CgOptions {
  double tol = 1e-10;
  // <= 0 selects 4 * (number of unknowns).
  int max_iter = 0;
};

struct CgResult {
  DenseMatrix solution;
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

// Plain conjugate gradient started from zero. For a consistent right-hand side
// g in range(G) every iterate stays in range(G), so the limit is the
// minimum-Frobenius-norm solution G^+ g. Non-convergence is reported, not thrown.
CgResult cg_min_norm(const SelfAdjointAction& gram, const DenseMatrix& rhs,
                     const CgOptions& options = {});

}  // namespace gnp
