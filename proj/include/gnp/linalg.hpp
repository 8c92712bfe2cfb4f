#pragma once

#include <Eigen/Dense>

#include "gnp/random.hpp"

namespace gnp {

using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Trace inner product <A, B> = sum_ij A_ij B_ij.
inline double frobenius_inner(const DenseMatrix& a, const DenseMatrix& b) {
  return a.cwiseProduct(b).sum();
}

bool all_finite(const DenseMatrix& a);

// iid N(0, 1) entries, filled in row-major order.
DenseMatrix gaussian_matrix(RandomStream& stream, Eigen::Index rows, Eigen::Index cols);

// Haar-like rows x cols matrix with orthonormal columns: QR of a Gaussian matrix
// with the signs of R's diagonal folded into Q.
DenseMatrix random_orthonormal(RandomStream& stream, Eigen::Index rows, Eigen::Index cols);

// U diag(sigma) V^T with sigma log-spaced from 1 to kappa, U (d x r) and V (r x r)
// random orthonormal. Throws std::invalid_argument on kappa < 1, r > d, or
// r == 1 with kappa != 1 (a single column always has condition number 1).
DenseMatrix conditioned_factor(RandomStream& stream, Eigen::Index d, Eigen::Index r, double kappa);

// Point drawn uniformly from the Frobenius ball of the given radius around center.
DenseMatrix uniform_in_ball(RandomStream& stream, const DenseMatrix& center, double radius);

// Nonincreasing singular values.
Vector singular_values(const DenseMatrix& a);

}  // namespace gnp
