#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Core>

namespace w2lab {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Weighted point cloud in R^d.  Weights default to uniform; the sample-based
// estimators below require uniform weights and equal counts.
struct EmpiricalMeasure {
  MatrixXd points;   // n x d
  VectorXd weights;  // length n, nonnegative, sums to 1

  static EmpiricalMeasure from_points(MatrixXd pts);
  void validate() const;
  Eigen::Index size() const { return points.rows(); }
  Eigen::Index dim() const { return points.cols(); }
};

struct W2Estimate {
  double value = 0.0;
  std::string method;  // "exact1d" | "assignment" | "sliced" | "gaussian_closed_form"
  std::optional<double> stderr_estimate;
};

// Quantile coupling: sort both samples and take the RMS of order-statistic
// differences.  Exact optimal transport in one dimension.
W2Estimate w2_exact_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                       bool bootstrap_stderr = true, std::uint64_t seed = 0);

// Exact discrete OT for equal-count uniform clouds via shortest augmenting
// paths on the squared-distance matrix (O(n^3) worst case, n <= 4096).
W2Estimate w2_exact_assignment(const EmpiricalMeasure& a,
                               const EmpiricalMeasure& b,
                               bool bootstrap_stderr = false,
                               std::uint64_t seed = 0);

// Monte Carlo average of 1-D W2^2 over random unit directions; stderr from
// the projection-wise variance.
W2Estimate w2_sliced(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                     int n_projections, std::uint64_t seed);

// Cloud-resampling standard error of the sliced estimate (32 resamples).
double w2_sliced_bootstrap_stderr(const EmpiricalMeasure& a,
                                  const EmpiricalMeasure& b, int n_projections,
                                  std::uint64_t seed, int n_resamples = 32);

// Bures-Wasserstein distance between Gaussians:
// value^2 = |mu1-mu2|^2 + tr(S1 + S2 - 2 (S1^{1/2} S2 S1^{1/2})^{1/2}).
W2Estimate w2_gaussian_closed_form(const VectorXd& mean1, const MatrixXd& cov1,
                                   const VectorXd& mean2, const MatrixXd& cov2);

}  // namespace w2lab
