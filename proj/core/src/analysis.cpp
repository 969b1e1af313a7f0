#include "w2lab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <json.hpp>

#include "w2lab/chain.hpp"
#include "w2lab/parallel.hpp"
#include "w2lab/rng.hpp"

namespace w2lab {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

LemmaCheckReport finish(std::string id, std::int64_t trials, double worst,
                        double tol, std::string note = {}) {
  LemmaCheckReport r;
  r.lemma_id = std::move(id);
  r.trials = trials;
  r.max_violation = worst;
  r.tolerance = tol;
  r.passed = worst <= tol;
  r.note = std::move(note);
  return r;
}

}  // namespace

RateFit fit_rate_slope(const std::vector<std::pair<double, double>>& points) {
  require(points.size() >= 4, "fit_rate_slope: need at least 4 points");
  RateFit f;
  double xmin = std::numeric_limits<double>::infinity(), xmax = 0.0;
  for (const auto& [scale, value] : points) {
    require(scale > 0.0, "fit_rate_slope: scales must be positive");
    require(value > 0.0, "fit_rate_slope: values must be positive");
    xmin = std::min(xmin, scale);
    xmax = std::max(xmax, scale);
    f.log_x.push_back(std::log(scale));
    f.log_y.push_back(std::log(value));
  }
  require(xmax / xmin >= 10.0 - 1e-9, "fit_rate_slope: scales must span a decade");

  const auto n = static_cast<double>(points.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    sx += f.log_x[i];
    sy += f.log_y[i];
    sxx += f.log_x[i] * f.log_x[i];
    sxy += f.log_x[i] * f.log_y[i];
  }
  const double den = n * sxx - sx * sx;
  f.slope = (n * sxy - sx * sy) / den;
  f.intercept = (sy - f.slope * sx) / n;

  double ss_res = 0, ss_tot = 0;
  const double ymean = sy / n;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double fit = f.slope * f.log_x[i] + f.intercept;
    ss_res += (f.log_y[i] - fit) * (f.log_y[i] - fit);
    ss_tot += (f.log_y[i] - ymean) * (f.log_y[i] - ymean);
  }
  f.r_squared = ss_tot > 0 ? std::max(0.0, 1.0 - ss_res / ss_tot) : 1.0;
  const double sigma2 = points.size() > 2 ? ss_res / (n - 2.0) : 0.0;
  f.slope_ci = 2.0 * std::sqrt(sigma2 * n / den);
  return f;
}

std::string lemma_reports_to_json(const std::vector<LemmaCheckReport>& reports) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json o;
    o["lemma_id"] = r.lemma_id;
    o["trials"] = r.trials;
    o["max_violation"] = r.max_violation;
    o["tolerance"] = r.tolerance;
    o["passed"] = r.passed;
    o["note"] = r.note;
    arr.push_back(o);
  }
  return arr.dump(2) + "\n";
}

std::vector<LemmaCheckReport> lemma_reports_from_json(const std::string& text) {
  const auto arr = nlohmann::json::parse(text);
  std::vector<LemmaCheckReport> out;
  for (const auto& o : arr) {
    LemmaCheckReport r;
    r.lemma_id = o.at("lemma_id").get<std::string>();
    r.trials = o.at("trials").get<std::int64_t>();
    r.max_violation = o.at("max_violation").get<double>();
    r.tolerance = o.at("tolerance").get<double>();
    r.passed = o.at("passed").get<bool>();
    r.note = o.at("note").get<std::string>();
    out.push_back(std::move(r));
  }
  return out;
}

LemmaCheckReport check_contraction(const Potential& potential,
                                   const NoiseModel& noise, double delta,
                                   int n_pairs, int steps, std::uint64_t seed) {
  require(delta > 0.0 && delta <= 1.0 / (2.0 * potential.L) + 1e-15,
          "check_contraction: requires delta <= 1/(2L)");
  const int d = potential.dim;
  const double bound = 1.0 - potential.m * delta / 2.0;

  const std::size_t chunks = parallel_chunk_count(static_cast<std::size_t>(n_pairs));
  std::vector<double> worst(chunks, -std::numeric_limits<double>::infinity());
  parallel_for_chunked(static_cast<std::size_t>(n_pairs),
                       [&](std::size_t lo, std::size_t hi, std::size_t c) {
    double w = worst[c];
    for (std::size_t p = lo; p < hi; ++p) {
      rng::Stream init(seed, static_cast<std::uint64_t>(p), 0xbeef);
      VectorXd x = 2.0 * init.gaussian_vector(d);
      VectorXd y = 2.0 * init.gaussian_vector(d);
      rng::Stream s(seed, static_cast<std::uint64_t>(p), 0xcafe);
      for (int k = 0; k < steps; ++k) {
        const double before = (x - y).squaredNorm();
        auto [xn, yn] = coupled_step(potential, noise, delta, x, y, s);
        const double after = (xn - yn).squaredNorm();
        if (before > 0.0) w = std::max(w, after / before - bound);
        x = std::move(xn);
        y = std::move(yn);
      }
    }
    worst[c] = w;
  });
  double w = -std::numeric_limits<double>::infinity();
  for (double v : worst) w = std::max(w, v);
  return finish("discrete_contraction", static_cast<std::int64_t>(n_pairs) * steps,
                w, 1e-12, "per-step ratio minus (1 - m delta/2)");
}

LemmaCheckReport check_subgaussian_tail(const EmpiricalMeasure& reference,
                                        double m, double c_sigma,
                                        const std::vector<double>& t_grid) {
  reference.validate();
  require(m > 0.0 && c_sigma > 0.0, "check_subgaussian_tail: m, c_sigma > 0");
  require(!t_grid.empty(), "check_subgaussian_tail: empty t grid");
  const auto n = static_cast<double>(reference.size());
  const double d = static_cast<double>(reference.dim());
  VectorXd sq(reference.size());
  for (Eigen::Index i = 0; i < reference.size(); ++i)
    sq[i] = reference.points.row(i).squaredNorm();

  double worst = -std::numeric_limits<double>::infinity();
  for (double t : t_grid) {
    double count = 0.0;
    for (Eigen::Index i = 0; i < sq.size(); ++i)
      if (sq[i] >= t) count += 1.0;
    const double tail = count / n;
    const double bound = 8.0 * d * std::exp(-m * t / (8.0 * c_sigma * c_sigma));
    const double se = std::sqrt(std::max(tail * (1.0 - tail), 1.0 / n) / n);
    worst = std::max(worst, tail - (bound + 3.0 * se));
  }
  return finish("p_star_subgaussian", static_cast<std::int64_t>(t_grid.size()), worst,
                0.0, "empirical tail minus (8 d exp(-mt/(8 c^2)) + 3 se)");
}

LemmaCheckReport check_kth_moment(const EmpiricalMeasure& reference, double m,
                                  double c_sigma, const std::vector<int>& ks) {
  reference.validate();
  const double d = static_cast<double>(reference.dim());
  const auto n = static_cast<double>(reference.size());
  const double c2m = c_sigma * c_sigma / m;
  double worst = -std::numeric_limits<double>::infinity();
  for (int k : ks) {
    require(k >= 1, "check_kth_moment: k >= 1");
    VectorXd pow_k(reference.size());
    for (Eigen::Index i = 0; i < reference.size(); ++i)
      pow_k[i] = std::pow(reference.points.row(i).squaredNorm(), k);
    const double mean = pow_k.mean();
    const double var = (pow_k.array() - mean).square().sum() / (n - 1.0);
    const double se = std::sqrt(var / n);
    double envelope = 128.0 * k * d * c2m;
    if (k >= 2) {
      const double base = 64.0 * (k - 1) * c2m * std::log(16.0 * (k - 1) * c2m);
      envelope = std::max(std::pow(base, k - 1), envelope);
    }
    worst = std::max(worst, mean - 3.0 * se - envelope);
  }
  return finish("kth_moment_bound", static_cast<std::int64_t>(ks.size()), worst, 0.0,
                "empirical E|x|^{2k} minus 3 se minus envelope");
}

LemmaCheckReport check_det_expansion(const std::vector<int>& dims,
                                     const std::vector<double>& eps_grid,
                                     int trials, std::uint64_t seed) {
  require(!dims.empty() && !eps_grid.empty(), "check_det_expansion: empty grids");
  const double c = 1.0;
  double worst = -std::numeric_limits<double>::infinity();
  std::int64_t count = 0;
  rng::Stream s(seed, 0xdec0);
  for (int t = 0; t < trials; ++t) {
    const int d = dims[static_cast<std::size_t>(s.index(static_cast<std::int64_t>(dims.size())))];
    MatrixXd g(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) g(i, j) = s.gaussian();
    MatrixXd a = 0.5 * (g + g.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(a);
    const double norm = es.eigenvalues().cwiseAbs().maxCoeff();
    if (norm > 0.0) a *= c / norm;  // |A|_2 = c exactly
    for (double eps : eps_grid) {
      if (eps > 1.0 / (2.0 * c * d)) continue;  // outside the lemma's premise
      const double det = (MatrixXd::Identity(d, d) + eps * a).determinant();
      const double tr = a.trace();
      const double tr2 = (a * a).trace();
      const double expansion = 1.0 + eps * tr + 0.5 * eps * eps * (tr * tr - tr2);
      const double bound = eps * eps * eps * c * c * c * d * d * d;
      worst = std::max(worst, std::abs(det - expansion) - bound);
      ++count;
    }
  }
  return finish("determinant_taylor", count, worst, 1e-8,
                "|det - expansion| minus eps^3 c^3 d^3");
}

LemmaCheckReport check_trace_bound(const std::vector<int>& dims, int trials,
                                   std::uint64_t seed) {
  require(!dims.empty(), "check_trace_bound: empty dims");
  double worst = -std::numeric_limits<double>::infinity();
  rng::Stream s(seed, 0x7eace);
  for (int t = 0; t < trials; ++t) {
    const int d = dims[static_cast<std::size_t>(s.index(static_cast<std::int64_t>(dims.size())))];
    MatrixXd a(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) a(i, j) = s.gaussian();
    const double opnorm = a.jacobiSvd().singularValues()(0);
    worst = std::max(worst, a.trace() - d * opnorm);
  }
  return finish("trace_upper_bound", trials, worst, 1e-9, "tr A minus d |A|_2");
}

LemmaCheckReport check_xlogx(const std::vector<double>& c_grid,
                             const std::vector<double>& a_grid) {
  require(!c_grid.empty() && !a_grid.empty(), "check_xlogx: empty grids");
  double worst = -std::numeric_limits<double>::infinity();
  std::int64_t count = 0;
  for (double c : c_grid) {
    for (double a : a_grid) {
      require(c > 0.0 && a > 0.0, "check_xlogx: c, a > 0");
      const double threshold = 3.0 * std::max(std::log(a / c) / c, 0.0);
      // Scan from just above the threshold out to 64x.
      for (int i = 0; i <= 40; ++i) {
        const double x = std::max(threshold, 1e-12) *
                         (1.0 + 1e-9 + static_cast<double>(i) * 1.575);
        if (x <= 0.0) continue;
        worst = std::max(worst, std::log(a * x) / c - x);
        ++count;
      }
    }
  }
  return finish("xlogx_bound", count, worst, 0.0, "(1/c) log(a x) minus x");
}

LemmaCheckReport check_sigma_derivative(const NoiseModel& noise,
                                        const MatrixXd& x_grid, double h) {
  require(x_grid.cols() == noise.dim, "check_sigma_derivative: bad grid");
  const int d = noise.dim;
  double worst = -std::numeric_limits<double>::infinity();

  if (noise.homogeneous) {
    // Both sides vanish identically; evaluate the FD side anyway.
    for (Eigen::Index r = 0; r < x_grid.rows(); ++r) {
      const VectorXd x = x_grid.row(r);
      VectorXd e = x;
      for (int i = 0; i < d; ++i) {
        double lhs_i = 0.0;
        for (int j = 0; j < d; ++j) {
          e[j] = x[j] + h;
          const double cp = noise.covariance(e)(i, j);
          e[j] = x[j] - h;
          const double cm = noise.covariance(e)(i, j);
          e[j] = x[j];
          lhs_i += (cp - cm) / (2.0 * h);
        }
        worst = std::max(worst, std::abs(lhs_i));
      }
    }
    return finish("sigma_derivative", x_grid.rows(), worst, 1e-6,
                  "homogeneous: divergence of constant covariance");
  }

  require(noise.has_jacobian(),
          "check_sigma_derivative: noise model exposes no jacobian");
  require(noise.family == "finite_sum_sgd",
          "check_sigma_derivative: exact expectation needs the finite index set");

  const int S = noise.components;
  require(S >= 1, "check_sigma_derivative: finite index set required");

  for (Eigen::Index r = 0; r < x_grid.rows(); ++r) {
    const VectorXd x = x_grid.row(r);
    // Exact expectation over the finite index set.
    VectorXd rhs = VectorXd::Zero(d);
    for (std::int64_t i = 0; i < S; ++i) {
      NoiseDraw e{VectorXd(), i};
      const MatrixXd g = noise.jacobian(x, e);
      const VectorXd tv = noise.apply(x, e);
      rhs += g * tv + g.trace() * tv;
    }
    rhs /= static_cast<double>(S);

    VectorXd lhs = VectorXd::Zero(d);
    VectorXd e = x;
    for (int j = 0; j < d; ++j) {
      e[j] = x[j] + h;
      const MatrixXd cp = noise.covariance(e);
      e[j] = x[j] - h;
      const MatrixXd cm = noise.covariance(e);
      e[j] = x[j];
      for (int i = 0; i < d; ++i) lhs[i] += (cp(i, j) - cm(i, j)) / (2.0 * h);
    }
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  return finish("sigma_derivative", x_grid.rows(), worst, 1e-6,
                "FD divergence of covariance vs E[G T + tr(G) T]");
}

LemmaCheckReport check_jacobian_invertibility(const Potential& potential,
                                              const NoiseModel& noise,
                                              double delta,
                                              const MatrixXd& x_grid) {
  require(delta > 0.0 && delta <= 1.0 / (8.0 * potential.L) + 1e-15,
          "check_jacobian_invertibility: requires delta <= 1/(8L)");
  require(x_grid.cols() == potential.dim, "check_jacobian_invertibility: bad grid");
  const int d = potential.dim;
  double worst = -std::numeric_limits<double>::infinity();
  const std::int64_t S = noise.homogeneous ? 1 : std::max(noise.components, 1);

  for (Eigen::Index r = 0; r < x_grid.rows(); ++r) {
    const VectorXd x = x_grid.row(r);
    for (std::int64_t i = 0; i < S; ++i) {
      MatrixXd jac = MatrixXd::Identity(d, d) - delta * potential.hess(x);
      if (!noise.homogeneous && noise.has_jacobian()) {
        NoiseDraw e{VectorXd(), i};
        jac += std::sqrt(2.0 * delta) * noise.jacobian(x, e);
      }
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(jac);
      worst = std::max(worst, 0.5 - es.eigenvalues().minCoeff());
    }
  }
  return finish("f_is_invertible", x_grid.rows() * S, worst, 0.0,
                "1/2 minus smallest eigenvalue of I - delta hess U + sqrt(2 delta) G");
}

LemmaCheckReport check_one_step_displacement(const Potential& potential,
                                             const NoiseModel& noise,
                                             double delta, int n_samples,
                                             std::uint64_t seed) {
  require(noise.homogeneous,
          "check_one_step_displacement: stated for homogeneous noise");
  // The lemma's premise ties the noise norm to L; track them separately and
  // use the max so the premise holds for e.g. Rademacher noise in d > L.
  const double L = std::max(potential.L, noise.norm_bound * noise.norm_bound);
  require(delta > 0.0 && delta <= 1.0 / (16.0 * L) + 1e-15,
          "check_one_step_displacement: requires delta <= 1/(16 L)");
  const int d = potential.dim;

  const std::size_t chunks = parallel_chunk_count(static_cast<std::size_t>(n_samples));
  std::vector<double> worst(chunks, -std::numeric_limits<double>::infinity());
  parallel_for_chunked(static_cast<std::size_t>(n_samples),
                       [&](std::size_t lo, std::size_t hi, std::size_t c) {
    double w = worst[c];
    for (std::size_t t = lo; t < hi; ++t) {
      rng::Stream s(seed, static_cast<std::uint64_t>(t), 0xd15b);
      const VectorXd y = 2.0 * s.gaussian_vector(d);  // departure point
      const VectorXd x = y - delta * potential.grad(y) +
                         std::sqrt(2.0 * delta) * noise.sample(y, s);
      const double lhs = (y - x).norm();
      const double rhs = 4.0 * std::sqrt(delta * L) * (x.norm() + 1.0);
      w = std::max(w, lhs - rhs);
    }
    worst[c] = w;
  });
  double w = -std::numeric_limits<double>::infinity();
  for (double v : worst) w = std::max(w, v);
  return finish("one_step_displacement", n_samples, w, 0.0,
                "|y - x| minus 4 sqrt(delta L)(|x| + 1) at the arrival point");
}

}  // namespace w2lab
