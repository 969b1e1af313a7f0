#include "w2lab/sde.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

#include <Eigen/Dense>

namespace w2lab {

MatrixXd psd_sqrt(const MatrixXd& covariance) {
  if (covariance.rows() != covariance.cols())
    throw std::invalid_argument("psd_sqrt: matrix must be square");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(covariance);
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  VectorXd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < -1e-12 * scale)
      throw std::invalid_argument("psd_sqrt: covariance has a negative eigenvalue");
    ev[i] = std::sqrt(std::max(ev[i], 0.0));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

SdeSystem make_sde_system(const Potential& potential, const NoiseModel& noise) {
  if (potential.dim != noise.dim)
    throw std::invalid_argument("make_sde_system: dimension mismatch");
  SdeSystem sys;
  sys.potential = potential;
  sys.covariance = noise.covariance;
  const int d = potential.dim;
  const MatrixXd c0 = noise.covariance(VectorXd::Zero(d));
  sys.unit_diffusion =
      noise.homogeneous &&
      (c0 - MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() <= 1e-12;
  if (sys.unit_diffusion) {
    sys.diffusion = [d](const VectorXd&) -> MatrixXd { return MatrixXd::Identity(d, d); };
  } else if (noise.homogeneous) {
    auto sig = std::make_shared<MatrixXd>(psd_sqrt(c0));
    sys.diffusion = [sig](const VectorXd&) -> MatrixXd { return *sig; };
  } else {
    auto cov = noise.covariance;
    sys.diffusion = [cov](const VectorXd& x) -> MatrixXd { return psd_sqrt(cov(x)); };
  }
  return sys;
}

VectorXd euler_maruyama_step(const SdeSystem& system, double delta,
                             const VectorXd& x, rng::Stream& stream) {
  if (!(delta > 0.0))
    throw std::invalid_argument("euler_maruyama_step: delta must be positive");
  const VectorXd z = stream.gaussian_vector(x.size());
  VectorXd next = x - delta * system.potential.grad(x);
  if (system.unit_diffusion)
    next += std::sqrt(2.0 * delta) * z;
  else
    next += std::sqrt(2.0 * delta) * (system.diffusion(x) * z);
  if (!next.allFinite())
    throw std::runtime_error("euler_maruyama_step: non-finite iterate");
  return next;
}

ReferenceSampler ReferenceSampler::exact_gaussian() {
  return ReferenceSampler{Kind::ExactGaussian, 0.0, 0, 0};
}

ReferenceSampler ReferenceSampler::fine_euler(double delta_experiment, double m,
                                              double divisor) {
  if (!(delta_experiment > 0.0) || !(m > 0.0))
    throw std::invalid_argument("fine_euler: delta and m must be positive");
  if (divisor < 50.0)
    throw std::invalid_argument("fine_euler: delta_ref must be <= delta/50");
  ReferenceSampler r;
  r.kind = Kind::FineEuler;
  r.delta_ref = delta_experiment / divisor;
  r.burn_in = static_cast<std::int64_t>(std::ceil(10.0 / (m * r.delta_ref)));
  r.thinning = static_cast<std::int64_t>(std::ceil(1.0 / (m * r.delta_ref)));
  return r;
}

MatrixXd sample_invariant(const SdeSystem& system, const ReferenceSampler& cfg,
                          int n, std::uint64_t seed) {
  if (n < 100) throw std::invalid_argument("sample_invariant: n must be >= 100");
  const int d = system.potential.dim;
  MatrixXd out(n, d);

  if (cfg.kind == ReferenceSampler::Kind::ExactGaussian) {
    if (system.potential.kind != "quadratic" || !system.unit_diffusion)
      throw std::invalid_argument(
          "sample_invariant: exact_gaussian needs a quadratic potential and unit diffusion");
    // OU invariant covariance solves A Sigma + Sigma A = 2 I, i.e. Sigma = A^{-1}.
    const MatrixXd A = system.potential.hess(VectorXd::Zero(d));
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(A);
    const MatrixXd half = es.eigenvectors() *
                          es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                          es.eigenvectors().transpose();
    rng::Stream s(seed, 0xadde, 0x0u);
    for (int i = 0; i < n; ++i) out.row(i) = (half * s.gaussian_vector(d)).transpose();
    return out;
  }

  if (!(cfg.delta_ref > 0.0) || cfg.burn_in < 0 || cfg.thinning < 1)
    throw std::invalid_argument("sample_invariant: bad fine_euler configuration");
  rng::Stream s(seed, 0xf1fe, 0x0u);
  VectorXd x = VectorXd::Zero(d);
  for (std::int64_t k = 0; k < cfg.burn_in; ++k)
    x = euler_maruyama_step(system, cfg.delta_ref, x, s);
  for (int i = 0; i < n; ++i) {
    for (std::int64_t t = 0; t < cfg.thinning; ++t)
      x = euler_maruyama_step(system, cfg.delta_ref, x, s);
    out.row(i) = x.transpose();
  }
  return out;
}

DensityModel density_from_log(std::function<double(const VectorXd&)> log_p,
                              std::function<VectorXd(const VectorXd&)> grad_log_p,
                              std::function<MatrixXd(const VectorXd&)> hess_log_p) {
  DensityModel m;
  m.value = [log_p](const VectorXd& x) { return std::exp(log_p(x)); };
  m.grad = [log_p, grad_log_p](const VectorXd& x) -> VectorXd {
    return std::exp(log_p(x)) * grad_log_p(x);
  };
  m.hess = [log_p, grad_log_p, hess_log_p](const VectorXd& x) -> MatrixXd {
    const double p = std::exp(log_p(x));
    const VectorXd g = grad_log_p(x);
    return p * (g * g.transpose() + hess_log_p(x));
  };
  return m;
}

DensityModel density_from_log_fd(std::function<double(const VectorXd&)> log_p,
                                 int dim, double h) {
  auto grad = [log_p, dim, h](const VectorXd& x) -> VectorXd {
    VectorXd g(dim);
    VectorXd e = x;
    for (int i = 0; i < dim; ++i) {
      e[i] = x[i] + h;
      const double fp = log_p(e);
      e[i] = x[i] - h;
      const double fm = log_p(e);
      e[i] = x[i];
      g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
  };
  auto hess = [log_p, dim, h](const VectorXd& x) -> MatrixXd {
    MatrixXd H(dim, dim);
    const double f0 = log_p(x);
    VectorXd e = x;
    for (int i = 0; i < dim; ++i) {
      e[i] = x[i] + h;
      const double fp = log_p(e);
      e[i] = x[i] - h;
      const double fm = log_p(e);
      e[i] = x[i];
      H(i, i) = (fp - 2.0 * f0 + fm) / (h * h);
    }
    for (int i = 0; i < dim; ++i) {
      for (int j = i + 1; j < dim; ++j) {
        VectorXd y = x;
        y[i] += h; y[j] += h;
        double s = log_p(y);
        y[j] -= 2.0 * h;
        s -= log_p(y);
        y[i] -= 2.0 * h;
        s += log_p(y);
        y[j] += 2.0 * h;
        s -= log_p(y);
        H(i, j) = H(j, i) = s / (4.0 * h * h);
      }
    }
    return H;
  };
  return density_from_log(log_p, grad, hess);
}

DensityModel density_sum(const DensityModel& a, const DensityModel& b) {
  DensityModel m;
  m.value = [a, b](const VectorXd& x) { return a.value(x) + b.value(x); };
  m.grad = [a, b](const VectorXd& x) -> VectorXd { return a.grad(x) + b.grad(x); };
  m.hess = [a, b](const VectorXd& x) -> MatrixXd { return a.hess(x) + b.hess(x); };
  return m;
}

double fokker_planck_residual(const SdeSystem& system,
                              const DensityModel& density, const VectorXd& x,
                              double h_cov) {
  const int d = static_cast<int>(x.size());
  const double p = density.value(x);
  const VectorXd gp = density.grad(x);
  const MatrixXd hp = density.hess(x);
  const VectorXd gu = system.potential.grad(x);
  const MatrixXd hu = system.potential.hess(x);

  if (system.unit_diffusion) {
    return p * hu.trace() + gp.dot(gu) + hp.trace();
  }

  const MatrixXd C0 = system.covariance(x);
  // First and second derivatives of C = sigma sigma^T by central differences.
  // div_row[i] = sum_j d_j C_ij; lap = sum_ij d2_ij C_ij.
  VectorXd div_row = VectorXd::Zero(d);
  double lap = 0.0;
  std::vector<MatrixXd> Cp(d), Cm(d);
  VectorXd e = x;
  for (int j = 0; j < d; ++j) {
    e[j] = x[j] + h_cov;
    Cp[j] = system.covariance(e);
    e[j] = x[j] - h_cov;
    Cm[j] = system.covariance(e);
    e[j] = x[j];
  }
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      div_row[i] += (Cp[j](i, j) - Cm[j](i, j)) / (2.0 * h_cov);
  for (int i = 0; i < d; ++i)
    lap += (Cp[i](i, i) - 2.0 * C0(i, i) + Cm[i](i, i)) / (h_cov * h_cov);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (i == j) continue;
      VectorXd y = x;
      y[i] += h_cov; y[j] += h_cov;
      double s = system.covariance(y)(i, j);
      y[j] -= 2.0 * h_cov;
      s -= system.covariance(y)(i, j);
      y[i] -= 2.0 * h_cov;
      s += system.covariance(y)(i, j);
      y[j] += 2.0 * h_cov;
      s -= system.covariance(y)(i, j);
      lap += s / (4.0 * h_cov * h_cov);
    }
  }

  return p * (lap + hu.trace()) + gp.dot(gu) + 2.0 * gp.dot(div_row) +
         (hp * C0).trace();
}

}  // namespace w2lab
