#include "gnp/tensor_sensing.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>
#include <string>

namespace gnp {
namespace {

void require_shape(const TensorSensingInstance& inst, const DenseMatrix& x, const char* who) {
  if (x.rows() != inst.params.d || x.cols() != inst.params.r) {
    throw std::invalid_argument(std::string(who) + ": iterate must be d x r");
  }
}

// Products <p_j, x_i> and <q_j, x_i> as m x r arrays.
struct Projections {
  Eigen::ArrayXXd px;
  Eigen::ArrayXXd qx;
};

Projections project(const TensorSensingInstance& inst, const DenseMatrix& x) {
  return {(inst.p * x).array(), (inst.q * x).array()};
}

Vector residual(const TensorSensingInstance& inst, const Projections& proj) {
  const int n = inst.params.n;
  return (hadamard_power(proj.px, n) - hadamard_power(proj.qx, n)).rowwise().sum().matrix() -
         inst.b;
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

void TensorSensingParams::validate() const {
  if (n < 2) throw std::invalid_argument("tensor sensing: order n must be >= 2");
  if (d < 1 || r < 1 || r > d) throw std::invalid_argument("tensor sensing: need 1 <= r <= d");
  if (m < 1) throw std::invalid_argument("tensor sensing: m must be >= 1");
  if (!(kappa >= 1.0)) throw std::invalid_argument("tensor sensing: kappa must be >= 1");
  if (!(pfail >= 0.0 && pfail < 0.5)) {
    throw std::invalid_argument("tensor sensing: pfail must lie in [0, 1/2)");
  }
}

Eigen::ArrayXXd hadamard_power(const Eigen::ArrayXXd& a, int k) {
  if (k < 0) throw std::invalid_argument("hadamard_power: negative exponent");
  Eigen::ArrayXXd out = Eigen::ArrayXXd::Ones(a.rows(), a.cols());
  for (int i = 0; i < k; ++i) out *= a;
  return out;
}

TensorSensingInstance generate_instance(const RandomStream& stream,
                                        const TensorSensingParams& params) {
  params.validate();
  TensorSensingInstance inst;
  inst.params = params;
  inst.seed = stream.seed();

  RandomStream factor = stream.substream("factor");
  inst.x_star = conditioned_factor(factor, params.d, params.r, params.kappa);

  RandomStream measurements = stream.substream("measurements");
  inst.p = gaussian_matrix(measurements, params.m, params.d);
  inst.q = gaussian_matrix(measurements, params.m, params.d);

  RandomStream noise = stream.substream("noise");
  inst.noise = Vector::Zero(params.m);
  inst.corrupted.assign(static_cast<std::size_t>(params.m), false);
  for (int j = 0; j < params.m; ++j) {
    if (noise.bernoulli(params.pfail)) {
      inst.corrupted[static_cast<std::size_t>(j)] = true;
      inst.noise(j) = noise.normal();
    }
  }

  inst.b = measure(inst, inst.x_star) + inst.noise;
  return inst;
}

Vector measure(const TensorSensingInstance& inst, const DenseMatrix& x) {
  require_shape(inst, x, "measure");
  const Projections proj = project(inst, x);
  const int n = inst.params.n;
  return (hadamard_power(proj.px, n) - hadamard_power(proj.qx, n)).rowwise().sum().matrix();
}

double objective(const TensorSensingInstance& inst, const DenseMatrix& x) {
  return (measure(inst, x) - inst.b).lpNorm<1>();
}

PullbackBundle subgradient_pullback(const TensorSensingInstance& inst, const DenseMatrix& x) {
  require_shape(inst, x, "subgradient_pullback");
  const int n = inst.params.n;
  const Projections proj = project(inst, x);
  const Vector rho = residual(inst, proj);
  const Eigen::ArrayXd s = rho.unaryExpr([](double v) { return sign(v); }).array();

  // Column i: n sum_j s_j (<p_j, x_i>^{n-1} p_j - <q_j, x_i>^{n-1} q_j).
  const Eigen::ArrayXXd wp = hadamard_power(proj.px, n - 1).colwise() * s;
  const Eigen::ArrayXXd wq = hadamard_power(proj.qx, n - 1).colwise() * s;
  PullbackBundle bundle;
  bundle.h_value = rho.lpNorm<1>();
  bundle.g = static_cast<double>(n) *
             (inst.p.transpose() * wp.matrix() - inst.q.transpose() * wq.matrix());
  bundle.gram = gram_action(x, n);
  return bundle;
}

DenseMatrix gram_apply(const DenseMatrix& x, const DenseMatrix& z, int n) {
  if (x.rows() != z.rows() || x.cols() != z.cols()) {
    throw std::invalid_argument("gram_apply: X and Z must have the same shape");
  }
  if (n < 2) throw std::invalid_argument("gram_apply: order must be >= 2");
  const Eigen::ArrayXXd xtx = (x.transpose() * x).array();
  const Eigen::ArrayXXd ztx = (z.transpose() * x).array();
  const double nd = static_cast<double>(n);
  return nd * (nd - 1.0) * x * (hadamard_power(xtx, n - 2) * ztx).matrix() +
         nd * z * hadamard_power(xtx, n - 1).matrix();
}

SelfAdjointAction gram_action(const DenseMatrix& x, int n) {
  // XtX is fixed for the lifetime of the action; precompute its powers.
  const Eigen::ArrayXXd xtx = (x.transpose() * x).array();
  const double nd = static_cast<double>(n);
  DenseMatrix cross = hadamard_power(xtx, n - 2).matrix();
  DenseMatrix diag_term = hadamard_power(xtx, n - 1).matrix();
  return SelfAdjointAction{
      x.rows(), x.cols(),
      [x, cross = std::move(cross), diag_term = std::move(diag_term), nd](const DenseMatrix& z) {
        const DenseMatrix ztx = z.transpose() * x;
        DenseMatrix out = nd * z * diag_term;
        out.noalias() += nd * (nd - 1.0) * x * cross.cwiseProduct(ztx);
        return out;
      }};
}

namespace {

// Y = X* for n >= 3. For n = 2, c(X*) = c(X* O) for orthogonal O, so Y = X* O
// with O the Procrustes rotation closest to X; the image is unchanged.
DenseMatrix aligned_solution(const TensorSensingInstance& inst, const DenseMatrix& x) {
  if (inst.params.n != 2) return inst.x_star;
  Eigen::JacobiSVD<DenseMatrix> svd(inst.x_star.transpose() * x,
                                    Eigen::ComputeFullU | Eigen::ComputeFullV);
  return inst.x_star * (svd.matrixU() * svd.matrixV().transpose());
}

}  // namespace

double image_distance(const TensorSensingInstance& inst, const DenseMatrix& x) {
  require_shape(inst, x, "image_distance");
  const int n = inst.params.n;
  const int r = inst.params.r;
  // Telescoping: x^{(x)n} - y^{(x)n} = sum_k x^{(x)k} (x) delta (x) y^{(x)(n-1-k)},
  // delta = x - y. Every term in the expanded squared norm carries two delta
  // factors, so the sum stays accurate as X approaches the solution; the plain
  // Gram identity loses ~sqrt(machine eps) of relative accuracy there.
  const DenseMatrix y = aligned_solution(inst, x);
  const DenseMatrix delta = x - y;
  const DenseMatrix* slots[3] = {&x, &delta, &y};
  DenseMatrix gram[3][3];
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) gram[a][b] = slots[a]->transpose() * *slots[b];
  }
  auto slot_kind = [](int k, int s) { return s < k ? 0 : (s == k ? 1 : 2); };
  double sum = 0.0;
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < r; ++j) {
      for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
          double prod = 1.0;
          for (int s = 0; s < n; ++s) prod *= gram[slot_kind(k, s)][slot_kind(l, s)](i, j);
          sum += prod;
        }
      }
    }
  }
  if (sum < -1e-9) {
    std::cerr << "image_distance: clamping negative radicand " << sum << '\n';
  }
  return std::sqrt(std::max(sum, 0.0));
}

DenseMatrix pullback_of_image_difference(const TensorSensingInstance& inst, const DenseMatrix& x) {
  require_shape(inst, x, "pullback_of_image_difference");
  const int n = inst.params.n;
  const Eigen::ArrayXXd xtx = (x.transpose() * x).array();
  const Eigen::ArrayXXd stx = (inst.x_star.transpose() * x).array();
  return static_cast<double>(n) * (x * hadamard_power(xtx, n - 1).matrix() -
                                   inst.x_star * hadamard_power(stx, n - 1).matrix());
}

double reference_optimal_value(const TensorSensingInstance& inst) {
  return inst.noise.lpNorm<1>();
}

TensorSensingOracle::TensorSensingOracle(std::shared_ptr<const TensorSensingInstance> inst,
                                         std::optional<double> optimal_value)
    : inst_(std::move(inst)) {
  if (!inst_) throw std::invalid_argument("TensorSensingOracle: null instance");
  optimal_value_ = optimal_value.value_or(reference_optimal_value(*inst_));
}

double TensorSensingOracle::objective(const DenseMatrix& x) const {
  return gnp::objective(*inst_, x);
}

PullbackBundle TensorSensingOracle::pullback(const DenseMatrix& x) const {
  return subgradient_pullback(*inst_, x);
}

std::optional<double> TensorSensingOracle::image_distance(const DenseMatrix& x) const {
  return gnp::image_distance(*inst_, x);
}

std::optional<DenseMatrix> TensorSensingOracle::image_difference_pullback(
    const DenseMatrix& x) const {
  return pullback_of_image_difference(*inst_, x);
}

}  // namespace gnp
