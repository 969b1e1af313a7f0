#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>
#include <Eigen/Core>

#include "w2lab/rng.hpp"

namespace w2lab {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Strongly convex potential U with analytic derivatives and the constants
// m, L that every chain/SDE bound is stated in.
struct Potential {
  int dim = 0;
  std::string kind;  // "quadratic" | "logcosh" | "finite_sum_mean"
  std::function<double(const VectorXd&)> value;
  std::function<VectorXd(const VectorXd&)> grad;
  std::function<MatrixXd(const VectorXd&)> hess;
  double m = 0.0;                      // strong convexity
  double L = 0.0;                      // smoothness, L >= m
  double third_derivative_bound = 0.0; // operator-norm bound on the 3-tensor
};

// One realisation of the noise index/value eta.  Homogeneous families carry
// the noise vector itself; the finite-sum family carries the component index.
struct NoiseDraw {
  VectorXd vec;
  std::int64_t index = -1;
};

// Noise map T_eta(x) with sampler, exact covariance E[T T^T], and (when the
// family has one) the derivative G_eta(x) of T_eta with respect to x.
struct NoiseModel {
  int dim = 0;
  std::string family;  // "rademacher" | "sphere" | "finite_sum_sgd"
  bool homogeneous = false;
  int components = 0;       // finite index set size; 0 when eta is continuous
  double c_sigma = 0.0;     // sup_x lambda_max(cov)^(1/2) over the working region
  double norm_bound = 0.0;  // a.s. bound on |T_eta(x)| at x = 0 (homogeneous: global)
  std::function<NoiseDraw(rng::Stream&)> draw_eta;
  std::function<VectorXd(const VectorXd&, const NoiseDraw&)> apply;
  std::function<MatrixXd(const VectorXd&)> covariance;
  // Empty when the family has no derivative (pure homogeneous noise has G == 0
  // and reports it as such).
  std::function<MatrixXd(const VectorXd&, const NoiseDraw&)> jacobian;

  VectorXd sample(const VectorXd& x, rng::Stream& s) const {
    return apply(x, draw_eta(s));
  }
  bool has_jacobian() const { return static_cast<bool>(jacobian); }
};

// Finite sum H(w) = (1/S) sum_i H_i(w) behind the stochastic-gradient noise.
struct FiniteSumSpec {
  int dim = 0;
  int components = 0;
  std::vector<std::function<VectorXd(const VectorXd&)>> component_grads;
  std::vector<std::function<MatrixXd(const VectorXd&)>> component_hessians;
  std::function<VectorXd(const VectorXd&)> mean_grad;
  std::function<MatrixXd(const VectorXd&)> mean_hessian;
  double m = 0.0;  // min over components of the strong-convexity constant
  double L = 0.0;  // max over components of the smoothness constant

  VectorXd grad_of(int i, const VectorXd& w) const { return component_grads[i](w); }
  MatrixXd hess_of(int i, const VectorXd& w) const { return component_hessians[i](w); }
};

// U(x) = x^T A x / 2 for symmetric positive definite A.
Potential make_quadratic_potential(const MatrixXd& A);

// U(x) = |x|^2/2 + alpha * sum_i log cosh(x_i), 0 < alpha <= 1.
Potential make_logcosh_potential(int dim, double alpha);

// Per-coordinate signs: covariance exactly I, |T| exactly sqrt(d).
NoiseModel make_rademacher_noise(int dim);

// Uniform on the sphere of the given radius: covariance (r^2/d) I.
NoiseModel make_sphere_noise(int dim, double radius);

// Random convex quadratic components H_i(w) = (w - b_i)^T A_i (w - b_i) / 2
// with sum_i A_i b_i = 0 so the mean gradient vanishes at 0.  Component
// Hessian eigenvalues are log-uniform in [eig_lo, eig_hi]; the offsets
// c_i = A_i b_i are centred shifted-exponential draws scaled by offset_scale.
FiniteSumSpec make_random_quadratic_components(int dim, int S,
                                               std::uint64_t seed,
                                               double eig_lo = 0.6,
                                               double eig_hi = 1.8,
                                               double offset_scale = 2.0);

// Noise map T_eta(x) = (1/sqrt(2)) (grad H(sqrt(delta) x) - grad H_eta(sqrt(delta) x)).
// Depends on the stepsize through the rescaling, so it is rebuilt per delta.
NoiseModel make_sgd_noise(const FiniteSumSpec& spec, double delta);

// Rescaled mean potential U(x) = H(sqrt(delta) x) / delta driving the SGD chain.
Potential make_sgd_potential(const FiniteSumSpec& spec, double delta);

// E[T_eta(x) T_eta(x)^T]; exact for every built-in family.
MatrixXd noise_covariance(const NoiseModel& model, const VectorXd& x);

}  // namespace w2lab
