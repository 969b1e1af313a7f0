#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "w2lab/model.hpp"
#include "w2lab/rng.hpp"

namespace w2lab {

// Symmetric PSD square root with eigenvalue clamping at 0.  Eigenvalues more
// negative than -1e-12 * scale are rejected as an invalid covariance.
MatrixXd psd_sqrt(const MatrixXd& covariance);

// The SDE dx = -grad U(x) dt + sqrt(2) sigma_x dB with sigma_x the PSD square
// root of the noise covariance.
struct SdeSystem {
  Potential potential;
  std::function<MatrixXd(const VectorXd&)> covariance;  // sigma_x sigma_x^T
  std::function<MatrixXd(const VectorXd&)> diffusion;   // sigma_x
  bool unit_diffusion = false;
};

SdeSystem make_sde_system(const Potential& potential, const NoiseModel& noise);

// Explicit first-order step: x - delta grad U(x) + sqrt(2 delta) sigma_x z.
VectorXd euler_maruyama_step(const SdeSystem& system, double delta,
                             const VectorXd& x, rng::Stream& stream);

struct ReferenceSampler {
  enum class Kind { ExactGaussian, FineEuler };
  Kind kind = Kind::ExactGaussian;
  // Fine Euler-Maruyama controls.
  double delta_ref = 0.0;
  std::int64_t burn_in = 0;
  std::int64_t thinning = 0;

  static ReferenceSampler exact_gaussian();
  // Defaults: delta_ref = delta_experiment / 100, burn_in = 10/(m delta_ref),
  // thinning = 1/(m delta_ref).  Requires delta_ref <= delta_experiment / 50.
  static ReferenceSampler fine_euler(double delta_experiment, double m,
                                     double divisor = 100.0);
};

// n approximately independent draws from the invariant distribution p*.
// Exact for quadratic U with unit diffusion (OU: covariance A^{-1}); the
// fine-Euler path runs one long trajectory with burn-in and thinning.
MatrixXd sample_invariant(const SdeSystem& system, const ReferenceSampler& cfg,
                          int n, std::uint64_t seed);

// A density p with its first two derivative maps.  Adapters build these from
// a log-density, either analytically or by central finite differences.
struct DensityModel {
  std::function<double(const VectorXd&)> value;
  std::function<VectorXd(const VectorXd&)> grad;
  std::function<MatrixXd(const VectorXd&)> hess;
};

DensityModel density_from_log(std::function<double(const VectorXd&)> log_p,
                              std::function<VectorXd(const VectorXd&)> grad_log_p,
                              std::function<MatrixXd(const VectorXd&)> hess_log_p);
DensityModel density_from_log_fd(std::function<double(const VectorXd&)> log_p,
                                 int dim, double h = 1e-4);
DensityModel density_sum(const DensityModel& a, const DensityModel& b);

// Right side of the Fokker-Planck stationarity identity at x:
//   p (sum_ij d2_ij C_ij + tr hess U) + <grad p, grad U>
//   + 2 sum_i (d_i p)(sum_j d_j C_ij) + <hess p, C>,    C = sigma sigma^T.
// Vanishes identically iff the density is stationary for the SDE.
double fokker_planck_residual(const SdeSystem& system,
                              const DensityModel& density, const VectorXd& x,
                              double h_cov = 1e-4);

}  // namespace w2lab
