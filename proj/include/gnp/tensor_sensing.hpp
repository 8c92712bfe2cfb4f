#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "gnp/composite.hpp"
#include "gnp/linalg.hpp"
#include "gnp/random.hpp"

namespace gnp {

// Symmetric rank-r tensor sensing:
//   c(X) = sum_i x_i^{(x)n},  A(M)_j = M(p_j^{(x)n}) - M(q_j^{(x)n}),
//   h(M) = ||A(M) - b||_1,    b = A(c(X*)) + noise.
// No order-n tensor is ever formed; everything reduces to inner products.

struct TensorSensingParams {
  int n = 2;
  int d = 0;
  int r = 0;
  int m = 0;
  double kappa = 1.0;
  double pfail = 0.0;

  // Throws std::invalid_argument on n < 2, r outside [1, d], m < 1, kappa < 1
  // or pfail outside [0, 1/2).
  void validate() const;
};

struct TensorSensingInstance {
  TensorSensingParams params;
  std::uint64_t seed = 0;
  DenseMatrix x_star;  // d x r
  DenseMatrix p;       // m x d, row j is p_j
  DenseMatrix q;       // m x d, row j is q_j
  Vector b;
  Vector noise;
  std::vector<bool> corrupted;  // Bernoulli outcome per measurement

  int order() const { return params.n; }
};

// Sub-streams "factor", "measurements" and "noise" of `stream` are consumed, so
// changing pfail never perturbs X* or the measurement vectors.
TensorSensingInstance generate_instance(const RandomStream& stream, const TensorSensingParams& params);

// Entry j: sum_i <p_j, x_i>^n - <q_j, x_i>^n.
Vector measure(const TensorSensingInstance& inst, const DenseMatrix& x);
double objective(const TensorSensingInstance& inst, const DenseMatrix& x);
// Pullback of v = sum_j sign(rho_j)(p_j^{(x)n} - q_j^{(x)n}) with sign(0) = 0.
PullbackBundle subgradient_pullback(const TensorSensingInstance& inst, const DenseMatrix& x);

// grad c(X)^T grad c(X) Z
//   = n(n-1) X ((X^T X)^{.(n-2)} . Z^T X) + n Z (X^T X)^{.(n-1)},
// where .k is the Hadamard power and A^{.0} is the all-ones matrix.
DenseMatrix gram_apply(const DenseMatrix& x, const DenseMatrix& z, int n);
SelfAdjointAction gram_action(const DenseMatrix& x, int n);

// ||c(X) - c(X*)||_F from Gram entries; a negative radicand is clamped to zero.
double image_distance(const TensorSensingInstance& inst, const DenseMatrix& x);
// grad c(X)^T (c(X) - c(X*)); column i is
// n sum_j (<x_i, x_j>^{n-1} x_j - <x_i, x*_j>^{n-1} x*_j).
DenseMatrix pullback_of_image_difference(const TensorSensingInstance& inst, const DenseMatrix& x);
// ||noise||_1 = h(c(X*)); exactly h* when pfail = 0.
double reference_optimal_value(const TensorSensingInstance& inst);

// Elementwise integer power; a.^0 is all ones.
Eigen::ArrayXXd hadamard_power(const Eigen::ArrayXXd& a, int k);

class TensorSensingOracle final : public CompositeOracle {
 public:
  // optimal_value defaults to reference_optimal_value(inst).
  explicit TensorSensingOracle(std::shared_ptr<const TensorSensingInstance> inst,
                               std::optional<double> optimal_value = std::nullopt);

  Eigen::Index rows() const override { return inst_->params.d; }
  Eigen::Index cols() const override { return inst_->params.r; }
  double objective(const DenseMatrix& x) const override;
  PullbackBundle pullback(const DenseMatrix& x) const override;
  std::optional<double> optimal_value() const override { return optimal_value_; }
  std::optional<double> image_distance(const DenseMatrix& x) const override;
  std::optional<DenseMatrix> image_difference_pullback(const DenseMatrix& x) const override;

  const TensorSensingInstance& instance() const { return *inst_; }

 private:
  std::shared_ptr<const TensorSensingInstance> inst_;
  double optimal_value_;
};

// JSON with params and seed; with include_matrices the exact X*, P, Q, noise
// and b are written too. Loading without matrices regenerates from the seed.
void save_instance(const TensorSensingInstance& inst, const std::filesystem::path& path,
                   bool include_matrices = false);
TensorSensingInstance load_instance(const std::filesystem::path& path);

}  // namespace gnp
