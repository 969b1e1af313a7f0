#include "w2lab/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "w2lab/parallel.hpp"
#include "w2lab/rng.hpp"

namespace w2lab {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

bool weights_uniform(const EmpiricalMeasure& m) {
  const double u = 1.0 / static_cast<double>(m.size());
  return (m.weights.array() - u).abs().maxCoeff() <= 1e-12;
}

void require_matched_uniform(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                             const char* who) {
  a.validate();
  b.validate();
  require(a.dim() == b.dim(), std::string(who) + ": dimension mismatch");
  require(a.size() == b.size(), std::string(who) + ": sample counts must match");
  require(weights_uniform(a) && weights_uniform(b),
          std::string(who) + ": weights must be uniform");
}

double mean_sq_sorted_diff(std::vector<double>& x, std::vector<double>& y) {
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dlt = x[i] - y[i];
    s += dlt * dlt;
  }
  return s / static_cast<double>(x.size());
}

// Lexicographic order on rows; makes the assignment reproducible under
// permutations of the input clouds.
std::vector<int> lex_order(const MatrixXd& pts) {
  std::vector<int> idx(static_cast<std::size_t>(pts.rows()));
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int i, int j) {
    for (Eigen::Index c = 0; c < pts.cols(); ++c) {
      if (pts(i, c) < pts(j, c)) return true;
      if (pts(i, c) > pts(j, c)) return false;
    }
    return i < j;
  });
  return idx;
}

// Shortest-augmenting-path assignment (Jonker-Volgenant style) on the
// squared-distance matrix, entries computed on demand.
double assignment_mean_cost(const MatrixXd& a, const MatrixXd& b) {
  const int n = static_cast<int>(a.rows());
  const std::vector<int> ia = lex_order(a);
  const std::vector<int> ib = lex_order(b);
  auto cost = [&](int i, int j) {
    return (a.row(ia[i]) - b.row(ib[j])).squaredNorm();
  };

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0);
  }

  double total = 0.0;
  for (int j = 1; j <= n; ++j) total += cost(match[j] - 1, j - 1);
  return total / static_cast<double>(n);
}

double bootstrap_stderr_1d(const std::vector<double>& xs, const std::vector<double>& ys,
                           std::uint64_t seed, int n_resamples) {
  const std::size_t n = xs.size();
  std::vector<double> vals(n_resamples);
  for (int r = 0; r < n_resamples; ++r) {
    rng::Stream s(seed, 0xb007, static_cast<std::uint64_t>(r));
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = xs[static_cast<std::size_t>(s.index(static_cast<std::int64_t>(n)))];
      y[i] = ys[static_cast<std::size_t>(s.index(static_cast<std::int64_t>(n)))];
    }
    vals[r] = std::sqrt(mean_sq_sorted_diff(x, y));
  }
  double mu = 0.0;
  for (double val : vals) mu += val;
  mu /= n_resamples;
  double var = 0.0;
  for (double val : vals) var += (val - mu) * (val - mu);
  return std::sqrt(var / (n_resamples - 1));
}

}  // namespace

EmpiricalMeasure EmpiricalMeasure::from_points(MatrixXd pts) {
  EmpiricalMeasure m;
  m.weights = VectorXd::Constant(pts.rows(), 1.0 / static_cast<double>(pts.rows()));
  m.points = std::move(pts);
  return m;
}

void EmpiricalMeasure::validate() const {
  require(points.rows() > 0, "empirical measure: empty point cloud");
  require(points.allFinite(), "empirical measure: points must be finite");
  require(weights.size() == points.rows(), "empirical measure: weight length mismatch");
  require(weights.minCoeff() >= 0.0, "empirical measure: negative weight");
  require(std::abs(weights.sum() - 1.0) <= 1e-12, "empirical measure: weights must sum to 1");
}

W2Estimate w2_exact_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                       bool bootstrap_stderr, std::uint64_t seed) {
  require_matched_uniform(a, b, "w2_exact_1d");
  require(a.dim() == 1, "w2_exact_1d: requires d = 1");
  const std::size_t n = static_cast<std::size_t>(a.size());
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = a.points(static_cast<Eigen::Index>(i), 0);
    ys[i] = b.points(static_cast<Eigen::Index>(i), 0);
  }
  std::vector<double> xc = xs, yc = ys;
  W2Estimate e;
  e.value = std::sqrt(mean_sq_sorted_diff(xc, yc));
  e.method = "exact1d";
  if (bootstrap_stderr) e.stderr_estimate = bootstrap_stderr_1d(xs, ys, seed, 32);
  return e;
}

W2Estimate w2_exact_assignment(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                               bool bootstrap_stderr, std::uint64_t seed) {
  require_matched_uniform(a, b, "w2_exact_assignment");
  require(a.size() <= 4096,
          "w2_exact_assignment: n > 4096; use w2_sliced for large clouds");
  W2Estimate e;
  e.value = std::sqrt(assignment_mean_cost(a.points, b.points));
  e.method = "assignment";
  if (bootstrap_stderr) {
    const int n_resamples = 32;
    const auto n = static_cast<std::int64_t>(a.size());
    std::vector<double> vals(n_resamples);
    parallel_for_chunked(n_resamples, [&](std::size_t lo, std::size_t hi, std::size_t) {
      for (std::size_t r = lo; r < hi; ++r) {
        rng::Stream s(seed, 0xb008, static_cast<std::uint64_t>(r));
        MatrixXd ap(n, a.dim()), bp(n, b.dim());
        for (std::int64_t i = 0; i < n; ++i) {
          ap.row(i) = a.points.row(s.index(n));
          bp.row(i) = b.points.row(s.index(n));
        }
        vals[r] = std::sqrt(assignment_mean_cost(ap, bp));
      }
    });
    double mu = 0.0;
    for (double v : vals) mu += v;
    mu /= n_resamples;
    double var = 0.0;
    for (double v : vals) var += (v - mu) * (v - mu);
    e.stderr_estimate = std::sqrt(var / (n_resamples - 1));
  }
  return e;
}

W2Estimate w2_sliced(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                     int n_projections, std::uint64_t seed) {
  require_matched_uniform(a, b, "w2_sliced");
  require(n_projections >= 16, "w2_sliced: need at least 16 projections");
  const std::size_t n = static_cast<std::size_t>(a.size());
  const Eigen::Index d = a.dim();
  std::vector<double> w2sq(static_cast<std::size_t>(n_projections));

  parallel_for_chunked(static_cast<std::size_t>(n_projections),
                       [&](std::size_t lo, std::size_t hi, std::size_t) {
    std::vector<double> xs(n), ys(n);
    for (std::size_t p = lo; p < hi; ++p) {
      rng::Stream s(seed, 0x511c, static_cast<std::uint64_t>(p));
      VectorXd dir = s.gaussian_vector(d);
      double nv = dir.norm();
      while (nv < 1e-12) {
        dir = s.gaussian_vector(d);
        nv = dir.norm();
      }
      dir /= nv;
      Eigen::Map<VectorXd>(xs.data(), a.size()) = a.points * dir;
      Eigen::Map<VectorXd>(ys.data(), b.size()) = b.points * dir;
      w2sq[p] = mean_sq_sorted_diff(xs, ys);
    }
  });

  double mean = 0.0;
  for (double v : w2sq) mean += v;
  mean /= n_projections;
  double var = 0.0;
  for (double v : w2sq) var += (v - mean) * (v - mean);
  var /= (n_projections - 1);

  W2Estimate e;
  e.value = std::sqrt(mean);
  e.method = "sliced";
  // delta method: se(sqrt(m)) = se(m) / (2 sqrt(m))
  if (e.value > 0.0)
    e.stderr_estimate = std::sqrt(var / n_projections) / (2.0 * e.value);
  else
    e.stderr_estimate = 0.0;
  return e;
}

double w2_sliced_bootstrap_stderr(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                                  int n_projections, std::uint64_t seed,
                                  int n_resamples) {
  require_matched_uniform(a, b, "w2_sliced_bootstrap_stderr");
  const auto n = static_cast<std::int64_t>(a.size());
  std::vector<double> vals(static_cast<std::size_t>(n_resamples));
  parallel_for_chunked(static_cast<std::size_t>(n_resamples),
                       [&](std::size_t lo, std::size_t hi, std::size_t) {
    for (std::size_t r = lo; r < hi; ++r) {
      rng::Stream s(seed, 0xb009, static_cast<std::uint64_t>(r));
      MatrixXd ap(n, a.dim()), bp(n, b.dim());
      for (std::int64_t i = 0; i < n; ++i) {
        ap.row(i) = a.points.row(s.index(n));
        bp.row(i) = b.points.row(s.index(n));
      }
      // Serial inner evaluation; resamples already fill the worker pool.
      std::vector<double> xs(static_cast<std::size_t>(n)), ys(xs);
      double mean = 0.0;
      for (int p = 0; p < n_projections; ++p) {
        rng::Stream sp(seed, 0x511d, static_cast<std::uint64_t>(p));
        VectorXd dir = sp.gaussian_vector(a.dim()).normalized();
        Eigen::Map<VectorXd>(xs.data(), n) = ap * dir;
        Eigen::Map<VectorXd>(ys.data(), n) = bp * dir;
        mean += mean_sq_sorted_diff(xs, ys);
      }
      vals[r] = std::sqrt(mean / n_projections);
    }
  });
  double mu = 0.0;
  for (double v : vals) mu += v;
  mu /= n_resamples;
  double var = 0.0;
  for (double v : vals) var += (v - mu) * (v - mu);
  return std::sqrt(var / (n_resamples - 1));
}

W2Estimate w2_gaussian_closed_form(const VectorXd& mean1, const MatrixXd& cov1,
                                   const VectorXd& mean2, const MatrixXd& cov2) {
  require(cov1.rows() == cov1.cols() && cov2.rows() == cov2.cols() &&
              cov1.rows() == cov2.rows() && mean1.size() == cov1.rows() &&
              mean2.size() == cov2.rows(),
          "w2_gaussian_closed_form: dimension mismatch");
  auto check_spd = [](const MatrixXd& c, const char* name) {
    require((c - c.transpose()).cwiseAbs().maxCoeff() <=
                1e-10 * (1.0 + c.cwiseAbs().maxCoeff()),
            std::string("w2_gaussian_closed_form: ") + name + " not symmetric");
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(c);
    require(es.eigenvalues().minCoeff() > 0.0,
            std::string("w2_gaussian_closed_form: ") + name + " not positive definite");
  };
  check_spd(cov1, "cov1");
  check_spd(cov2, "cov2");

  Eigen::SelfAdjointEigenSolver<MatrixXd> es1(cov1);
  const MatrixXd s1 = es1.eigenvectors() *
                      es1.eigenvalues().cwiseSqrt().asDiagonal() *
                      es1.eigenvectors().transpose();
  Eigen::SelfAdjointEigenSolver<MatrixXd> esm(s1 * cov2 * s1);
  const double cross = esm.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  const double sq = (mean1 - mean2).squaredNorm() + cov1.trace() + cov2.trace() -
                    2.0 * cross;
  W2Estimate e;
  e.value = std::sqrt(std::max(sq, 0.0));
  e.method = "gaussian_closed_form";
  return e;
}

}  // namespace w2lab
