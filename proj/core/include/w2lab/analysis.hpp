#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "w2lab/model.hpp"
#include "w2lab/wasserstein.hpp"

namespace w2lab {

struct RateFit {
  std::vector<double> log_x;
  std::vector<double> log_y;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_ci = 0.0;  // +- 2 sigma half-width
};

// OLS on (log scale, log value); needs >= 4 points spanning a decade.
RateFit fit_rate_slope(const std::vector<std::pair<double, double>>& points);

struct LemmaCheckReport {
  std::string lemma_id;
  std::int64_t trials = 0;
  double max_violation = 0.0;  // worst signed margin; <= tolerance passes
  double tolerance = 0.0;
  bool passed = false;
  std::string note;
};

std::string lemma_reports_to_json(const std::vector<LemmaCheckReport>& reports);
std::vector<LemmaCheckReport> lemma_reports_from_json(const std::string& text);

// Synchronous-coupling contraction: per-step squared-distance ratio
// <= 1 - m delta / 2 for every pair and every step; requires delta <= 1/(2L).
LemmaCheckReport check_contraction(const Potential& potential,
                                   const NoiseModel& noise, double delta,
                                   int n_pairs, int steps, std::uint64_t seed);

// Subgaussian tail of a reference sample: empirical P(|x|^2 >= t) must stay
// under 8 d exp(-m t / (8 c_sigma^2)) plus 3 binomial standard errors.
LemmaCheckReport check_subgaussian_tail(const EmpiricalMeasure& reference,
                                        double m, double c_sigma,
                                        const std::vector<double>& t_grid);

// Even moments E|x|^{2k} for k in ks against the explicit envelope
// max{(2^6 (k-1) (c^2/m) log(16 (k-1) c^2/m))^{k-1}, 128 k d c^2/m}.
LemmaCheckReport check_kth_moment(const EmpiricalMeasure& reference, double m,
                                  double c_sigma, const std::vector<int>& ks);

// |det(I + eps A) - (1 + eps tr A + eps^2/2 ((tr A)^2 - tr A^2))| <= eps^3 c^3 d^3
// for random symmetric A with |A|_2 <= c = 1 and eps <= 1/(2 c d).
LemmaCheckReport check_det_expansion(const std::vector<int>& dims,
                                     const std::vector<double>& eps_grid,
                                     int trials, std::uint64_t seed);

// tr A <= d |A|_2 over random square matrices.
LemmaCheckReport check_trace_bound(const std::vector<int>& dims, int trials,
                                   std::uint64_t seed);

// (1/c) log(a x) <= x for x above 3 max{(1/c) log(a/c), 0}.
LemmaCheckReport check_xlogx(const std::vector<double>& c_grid,
                             const std::vector<double>& a_grid);

// Row divergence of the covariance: central differences of
// sum_j d_j [sigma sigma^T]_{ij} against E[G T + tr(G) T]_i.
LemmaCheckReport check_sigma_derivative(const NoiseModel& noise,
                                        const MatrixXd& x_grid, double h);

// Eigenvalues of I - delta hess U(x) + sqrt(2 delta) G_eta(x) all above 1/2
// across sampled (x, eta); requires delta <= 1/(8L).
LemmaCheckReport check_jacobian_invertibility(const Potential& potential,
                                              const NoiseModel& noise,
                                              double delta,
                                              const MatrixXd& x_grid);

// One-step displacement |x' - x| <= 4 sqrt(delta L) (|x'| + 1) stated at the
// arrival point, for homogeneous noise and delta <= 1/(16 L).  L here is
// max(L_potential, norm_bound^2) so the noise-norm premise holds.
LemmaCheckReport check_one_step_displacement(const Potential& potential,
                                             const NoiseModel& noise,
                                             double delta, int n_samples,
                                             std::uint64_t seed);

}  // namespace w2lab
