#pragma once

// Explicit-tensor reference implementations. Everything here materializes
// order-n tensors as flat vectors of length d^n (index a_1 d^{n-1} + ... + a_n)
// and is deliberately independent of the Gram-identity code paths it checks.

#include <cmath>
#include <vector>

#include "gnp/linalg.hpp"
#include "gnp/tensor_sensing.hpp"

namespace gnp::testing {

inline Vector kron(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

// v (x) v (x) ... (x) v, n factors.
inline Vector tensor_power(const Vector& v, int n) {
  Vector out = v;
  for (int k = 1; k < n; ++k) out = kron(out, v);
  return out;
}

// c(X) = sum_i x_i^{(x)n}
inline Vector tensor_map(const DenseMatrix& x, int n) {
  Vector out = Vector::Zero(static_cast<Eigen::Index>(std::pow(x.rows(), n)));
  for (Eigen::Index i = 0; i < x.cols(); ++i) out += tensor_power(x.col(i), n);
  return out;
}

// Explicit d^n x (d r) Jacobian. Column a + i d (Eigen's storage order for X)
// is sum_k x_i^{(x)k} (x) e_a (x) x_i^{(x)(n-1-k)}.
inline DenseMatrix jacobian(const DenseMatrix& x, int n) {
  const Eigen::Index d = x.rows();
  const Eigen::Index r = x.cols();
  const auto len = static_cast<Eigen::Index>(std::pow(d, n));
  DenseMatrix jac = DenseMatrix::Zero(len, d * r);
  for (Eigen::Index i = 0; i < r; ++i) {
    const Vector xi = x.col(i);
    for (Eigen::Index a = 0; a < d; ++a) {
      const Vector ea = Vector::Unit(d, a);
      Vector col = Vector::Zero(len);
      for (int k = 0; k < n; ++k) {
        Vector term = Vector::Ones(1);
        for (int s = 0; s < n; ++s) term = kron(term, s == k ? ea : xi);
        col += term;
      }
      jac.col(a + i * d) = col;
    }
  }
  return jac;
}

inline Vector flatten(const DenseMatrix& a) {
  return Eigen::Map<const Vector>(a.data(), a.size());
}

inline DenseMatrix unflatten(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const DenseMatrix>(v.data(), rows, cols);
}

// A(M)_j = <M, p_j^{(x)n}> - <M, q_j^{(x)n}>
inline Vector apply_measurements(const TensorSensingInstance& inst, const Vector& tensor) {
  const int n = inst.params.n;
  Vector out(inst.params.m);
  for (int j = 0; j < inst.params.m; ++j) {
    const Vector pj = inst.p.row(j).transpose();
    const Vector qj = inst.q.row(j).transpose();
    out(j) = tensor.dot(tensor_power(pj, n)) - tensor.dot(tensor_power(qj, n));
  }
  return out;
}

inline Vector measure_explicit(const TensorSensingInstance& inst, const DenseMatrix& x) {
  return apply_measurements(inst, tensor_map(x, inst.params.n));
}

inline double objective_explicit(const TensorSensingInstance& inst, const DenseMatrix& x) {
  return (measure_explicit(inst, x) - inst.b).lpNorm<1>();
}

// J^T v for v = sum_j sign(rho_j) (p_j^{(x)n} - q_j^{(x)n}).
inline DenseMatrix pullback_explicit(const TensorSensingInstance& inst, const DenseMatrix& x) {
  const int n = inst.params.n;
  const Vector rho = measure_explicit(inst, x) - inst.b;
  Vector v = Vector::Zero(static_cast<Eigen::Index>(std::pow(inst.params.d, n)));
  for (int j = 0; j < inst.params.m; ++j) {
    const double s = rho(j) > 0 ? 1.0 : (rho(j) < 0 ? -1.0 : 0.0);
    v += s * (tensor_power(inst.p.row(j).transpose(), n) -
              tensor_power(inst.q.row(j).transpose(), n));
  }
  return unflatten(jacobian(x, n).transpose() * v, x.rows(), x.cols());
}

// Small random instance with pfail = 0 unless given.
inline TensorSensingInstance small_instance(std::uint64_t seed, int n, int d, int r, int m,
                                            double kappa = 1.0, double pfail = 0.0) {
  TensorSensingParams params;
  params.n = n;
  params.d = d;
  params.r = r;
  params.m = m;
  params.kappa = r == 1 ? 1.0 : kappa;
  params.pfail = pfail;
  return generate_instance(RandomStream(seed), params);
}

inline double rel_diff(const DenseMatrix& a, const DenseMatrix& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale > 0.0 ? (a - b).norm() / scale : 0.0;
}

}  // namespace gnp::testing
