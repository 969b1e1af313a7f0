#include "w2lab/model.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

#include <Eigen/Dense>

namespace w2lab {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

Potential make_quadratic_potential(const MatrixXd& A) {
  require(A.rows() == A.cols() && A.rows() > 0, "quadratic potential: A must be square");
  require((A - A.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + A.cwiseAbs().maxCoeff()),
          "quadratic potential: A must be symmetric");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(A);
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  require(lmin > 0.0, "quadratic potential: A must be positive definite");

  auto Ap = std::make_shared<MatrixXd>(A);
  Potential p;
  p.dim = static_cast<int>(A.rows());
  p.kind = "quadratic";
  p.value = [Ap](const VectorXd& x) { return 0.5 * x.dot(*Ap * x); };
  p.grad = [Ap](const VectorXd& x) -> VectorXd { return *Ap * x; };
  p.hess = [Ap](const VectorXd&) -> MatrixXd { return *Ap; };
  p.m = lmin;
  p.L = lmax;
  p.third_derivative_bound = 0.0;
  return p;
}

Potential make_logcosh_potential(int dim, double alpha) {
  require(dim > 0, "logcosh potential: dim must be positive");
  require(alpha > 0.0 && alpha <= 1.0, "logcosh potential: alpha must lie in (0, 1]");
  Potential p;
  p.dim = dim;
  p.kind = "logcosh";
  p.value = [alpha](const VectorXd& x) {
    double s = 0.5 * x.squaredNorm();
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      // log cosh without overflow: |t| + log1p(e^{-2|t|}) - log 2
      const double t = std::abs(x[i]);
      s += alpha * (t + std::log1p(std::exp(-2.0 * t)) - 0.6931471805599453);
    }
    return s;
  };
  p.grad = [alpha](const VectorXd& x) -> VectorXd {
    VectorXd g = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) g[i] += alpha * std::tanh(x[i]);
    return g;
  };
  p.hess = [alpha, dim](const VectorXd& x) -> MatrixXd {
    MatrixXd h = MatrixXd::Identity(dim, dim);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double c = std::cosh(x[i]);
      h(i, i) += alpha / (c * c);
    }
    return h;
  };
  p.m = 1.0;
  p.L = 1.0 + alpha;
  p.third_derivative_bound = 2.0 * alpha;
  return p;
}

NoiseModel make_rademacher_noise(int dim) {
  require(dim > 0, "rademacher noise: dim must be positive");
  NoiseModel n;
  n.dim = dim;
  n.family = "rademacher";
  n.homogeneous = true;
  n.c_sigma = 1.0;
  n.norm_bound = std::sqrt(static_cast<double>(dim));
  n.draw_eta = [dim](rng::Stream& s) {
    return NoiseDraw{s.rademacher_vector(dim), -1};
  };
  n.apply = [](const VectorXd&, const NoiseDraw& e) { return e.vec; };
  n.covariance = [dim](const VectorXd&) -> MatrixXd { return MatrixXd::Identity(dim, dim); };
  return n;
}

NoiseModel make_sphere_noise(int dim, double radius) {
  require(dim > 0, "sphere noise: dim must be positive");
  require(radius > 0.0, "sphere noise: radius must be positive");
  NoiseModel n;
  n.dim = dim;
  n.family = "sphere";
  n.homogeneous = true;
  n.c_sigma = radius / std::sqrt(static_cast<double>(dim));
  n.norm_bound = radius;
  n.draw_eta = [dim, radius](rng::Stream& s) {
    VectorXd v = s.gaussian_vector(dim);
    double nv = v.norm();
    while (nv < 1e-12) {  // essentially unreachable; avoids 0/0
      v = s.gaussian_vector(dim);
      nv = v.norm();
    }
    return NoiseDraw{(radius / nv) * v, -1};
  };
  n.apply = [](const VectorXd&, const NoiseDraw& e) { return e.vec; };
  const double v = radius * radius / static_cast<double>(dim);
  n.covariance = [dim, v](const VectorXd&) -> MatrixXd {
    return v * MatrixXd::Identity(dim, dim);
  };
  return n;
}

FiniteSumSpec make_random_quadratic_components(int dim, int S, std::uint64_t seed,
                                               double eig_lo, double eig_hi,
                                               double offset_scale) {
  require(dim > 0, "finite sum: dim must be positive");
  require(S >= 1, "finite sum: need at least one component");
  require(0.0 < eig_lo && eig_lo <= eig_hi, "finite sum: bad eigenvalue range");

  rng::Stream s(seed, 0x4153u /*"AS"*/);
  auto As = std::make_shared<std::vector<MatrixXd>>();
  auto cs = std::make_shared<std::vector<VectorXd>>();  // c_i = A_i b_i, centred
  for (int i = 0; i < S; ++i) {
    // Random rotation via QR of a Gaussian matrix, eigenvalues log-uniform.
    MatrixXd G(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) G(r, c) = s.gaussian();
    Eigen::HouseholderQR<MatrixXd> qr(G);
    MatrixXd Q = qr.householderQ();
    VectorXd ev(dim);
    for (int j = 0; j < dim; ++j)
      ev[j] = std::exp(std::log(eig_lo) +
                       (std::log(eig_hi) - std::log(eig_lo)) * s.uniform01());
    As->push_back(Q * ev.asDiagonal() * Q.transpose());
  }
  VectorXd cbar = VectorXd::Zero(dim);
  for (int i = 0; i < S; ++i) {
    VectorXd c(dim);
    for (int j = 0; j < dim; ++j) {
      const double e = -std::log(s.uniform01());  // Exp(1)
      c[j] = offset_scale * (e - 1.0) * s.rademacher();
    }
    cs->push_back(c);
    cbar += c;
  }
  cbar /= static_cast<double>(S);
  for (auto& c : *cs) c -= cbar;  // sum A_i b_i = 0  =>  mean gradient vanishes at 0

  FiniteSumSpec spec;
  spec.dim = dim;
  spec.components = S;
  double m = std::numeric_limits<double>::infinity(), L = 0.0;
  for (int i = 0; i < S; ++i) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es((*As)[i]);
    m = std::min(m, es.eigenvalues().minCoeff());
    L = std::max(L, es.eigenvalues().maxCoeff());
    spec.component_grads.push_back(
        [As, cs, i](const VectorXd& w) -> VectorXd { return (*As)[i] * w - (*cs)[i]; });
    spec.component_hessians.push_back(
        [As, i](const VectorXd&) -> MatrixXd { return (*As)[i]; });
  }
  spec.m = m;
  spec.L = L;
  auto Abar = std::make_shared<MatrixXd>(MatrixXd::Zero(dim, dim));
  for (const auto& A : *As) *Abar += A;
  *Abar /= static_cast<double>(S);
  spec.mean_grad = [Abar](const VectorXd& w) -> VectorXd { return *Abar * w; };
  spec.mean_hessian = [Abar](const VectorXd&) -> MatrixXd { return *Abar; };
  return spec;
}

NoiseModel make_sgd_noise(const FiniteSumSpec& spec, double delta) {
  require(spec.components >= 1, "sgd noise: empty finite sum");
  require(delta > 0.0, "sgd noise: delta must be positive");
  const int S = spec.components;
  const int d = spec.dim;
  const double rd = std::sqrt(delta);
  auto sp = std::make_shared<FiniteSumSpec>(spec);

  NoiseModel n;
  n.dim = d;
  n.family = "finite_sum_sgd";
  n.homogeneous = false;
  n.components = S;
  n.draw_eta = [S](rng::Stream& s) { return NoiseDraw{VectorXd(), s.index(S)}; };
  n.apply = [sp, rd](const VectorXd& x, const NoiseDraw& e) -> VectorXd {
    const VectorXd w = rd * x;
    return (sp->mean_grad(w) - sp->grad_of(static_cast<int>(e.index), w)) /
           std::sqrt(2.0);
  };
  n.covariance = [sp, rd, S, d](const VectorXd& x) -> MatrixXd {
    const VectorXd w = rd * x;
    const VectorXd g = sp->mean_grad(w);
    MatrixXd c = MatrixXd::Zero(d, d);
    for (int i = 0; i < S; ++i) {
      const VectorXd y = g - sp->grad_of(i, w);
      c.noalias() += y * y.transpose();
    }
    return c / (2.0 * S);
  };
  n.jacobian = [sp, rd, delta](const VectorXd& x, const NoiseDraw& e) -> MatrixXd {
    const VectorXd w = rd * x;
    return std::sqrt(delta / 2.0) *
           (sp->mean_hessian(w) - sp->hess_of(static_cast<int>(e.index), w));
  };

  // Covariance bound over the working region |x| <= 6 (position-dependent
  // noise has no global bound; the chain mixes well inside this ball).
  double c2 = 0.0, nb = 0.0;
  rng::Stream probe(0x5eed, 0xc516);
  for (int t = 0; t < 64; ++t) {
    VectorXd x = t == 0 ? VectorXd::Zero(d)
                        : VectorXd(6.0 * probe.uniform01() * probe.gaussian_vector(d).normalized());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(n.covariance(x));
    c2 = std::max(c2, es.eigenvalues().maxCoeff());
    const VectorXd w = rd * x;
    const VectorXd g = sp->mean_grad(w);
    for (int i = 0; i < S; ++i)
      nb = std::max(nb, ((g - sp->grad_of(i, w)) / std::sqrt(2.0)).norm());
  }
  n.c_sigma = std::sqrt(c2);
  n.norm_bound = nb;
  return n;
}

Potential make_sgd_potential(const FiniteSumSpec& spec, double delta) {
  require(delta > 0.0, "sgd potential: delta must be positive");
  const double rd = std::sqrt(delta);
  auto sp = std::make_shared<FiniteSumSpec>(spec);
  Potential p;
  p.dim = spec.dim;
  p.kind = "finite_sum_mean";
  // U(x) = H(sqrt(delta) x)/delta; derivatives in x keep the constants of H.
  p.value = [sp, rd, delta](const VectorXd& x) {
    // Quadrature-free: only grad/hess are needed by the chain; value follows
    // from integrating the mean gradient along the ray (components are
    // quadratic so the midpoint rule below is exact for built-ins).
    const VectorXd w = rd * x;
    const VectorXd g0 = sp->mean_grad(VectorXd::Zero(w.size()));
    const VectorXd gm = sp->mean_grad(0.5 * w);
    const VectorXd g1 = sp->mean_grad(w);
    return (w.dot(g0) + 4.0 * w.dot(gm) + w.dot(g1)) / (6.0 * delta);
  };
  p.grad = [sp, rd](const VectorXd& x) -> VectorXd { return sp->mean_grad(rd * x) / rd; };
  p.hess = [sp, rd](const VectorXd& x) -> MatrixXd { return sp->mean_hessian(rd * x); };
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(spec.mean_hessian(VectorXd::Zero(spec.dim)));
  p.m = es.eigenvalues().minCoeff();
  p.L = es.eigenvalues().maxCoeff();
  p.third_derivative_bound = 0.0;
  return p;
}

MatrixXd noise_covariance(const NoiseModel& model, const VectorXd& x) {
  if (!x.allFinite()) throw std::invalid_argument("noise_covariance: x must be finite");
  return model.covariance(x);
}

}  // namespace w2lab
