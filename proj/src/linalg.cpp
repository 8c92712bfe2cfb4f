#include "gnp/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace gnp {

bool all_finite(const DenseMatrix& a) { return a.allFinite(); }

DenseMatrix gaussian_matrix(RandomStream& stream, Eigen::Index rows, Eigen::Index cols) {
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("gaussian_matrix: rows and cols must be positive");
  }
  DenseMatrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = stream.normal();
  }
  return out;
}

DenseMatrix random_orthonormal(RandomStream& stream, Eigen::Index rows, Eigen::Index cols) {
  if (cols > rows) throw std::invalid_argument("random_orthonormal: cols > rows");
  const DenseMatrix g = gaussian_matrix(stream, rows, cols);
  Eigen::HouseholderQR<DenseMatrix> qr(g);
  DenseMatrix q = qr.householderQ() * DenseMatrix::Identity(rows, cols);
  const DenseMatrix r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

DenseMatrix conditioned_factor(RandomStream& stream, Eigen::Index d, Eigen::Index r, double kappa) {
  if (!(kappa >= 1.0)) throw std::invalid_argument("conditioned_factor: kappa must be >= 1");
  if (r < 1 || r > d) throw std::invalid_argument("conditioned_factor: need 1 <= r <= d");
  if (r == 1 && kappa != 1.0) {
    throw std::invalid_argument("conditioned_factor: a rank-one factor has condition number 1");
  }
  Vector sigma(r);
  for (Eigen::Index i = 0; i < r; ++i) {
    const double frac = r == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(r - 1);
    sigma(i) = std::pow(kappa, frac);
  }
  sigma(r - 1) = kappa;
  const DenseMatrix u = random_orthonormal(stream, d, r);
  const DenseMatrix v = random_orthonormal(stream, r, r);
  return u * sigma.asDiagonal() * v.transpose();
}

DenseMatrix uniform_in_ball(RandomStream& stream, const DenseMatrix& center, double radius) {
  DenseMatrix dir = gaussian_matrix(stream, center.rows(), center.cols());
  const double norm = dir.norm();
  const double dim = static_cast<double>(center.size());
  const double scale = radius * std::pow(stream.uniform(), 1.0 / dim);
  return center + (scale / norm) * dir;
}

Vector singular_values(const DenseMatrix& a) {
  Eigen::JacobiSVD<DenseMatrix> svd(a);
  return svd.singularValues();
}

}  // namespace gnp
