#include "w2lab/chain.hpp"

#include <cmath>
#include <sstream>

#include "w2lab/parallel.hpp"

namespace w2lab {

namespace {

constexpr double kDivergenceRadius = 1e12;

// Role tags keep the init draws and the step draws in disjoint substreams.
constexpr std::uint64_t kInitRole = 0x1217;
constexpr std::uint64_t kStepRole = 0x57e9;

void check_checkpoints(const std::vector<std::int64_t>& cps) {
  if (cps.empty()) throw std::invalid_argument("checkpoints must be nonempty");
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (cps[i] < 0) throw std::invalid_argument("checkpoints must be nonnegative");
    if (i > 0 && cps[i] <= cps[i - 1])
      throw std::invalid_argument("checkpoints must be strictly increasing");
  }
}

void guard_finite(const VectorXd& x, std::int64_t chain, std::int64_t step) {
  if (!x.allFinite() || x.norm() > kDivergenceRadius)
    throw DivergenceError(chain, step, x.norm());
}

VectorXd initial_point(const InitialCloud& p0, int dim, std::uint64_t seed,
                       std::int64_t chain) {
  if (p0.kind == InitialCloud::Kind::PointMass) return VectorXd::Zero(dim);
  rng::Stream s(seed, static_cast<std::uint64_t>(chain), kInitRole);
  return p0.scale * s.gaussian_vector(dim);
}

}  // namespace

DivergenceError::DivergenceError(std::int64_t chain, std::int64_t step, double norm)
    : std::runtime_error([&] {
        std::ostringstream os;
        os << "chain " << chain << " diverged at step " << step
           << " (|x| = " << norm << ")";
        return os.str();
      }()),
      chain_id(chain),
      step(step) {}

StepSchedule StepSchedule::constant(double delta) {
  if (!(delta > 0.0))
    throw std::invalid_argument("step schedule: delta must be strictly positive");
  return StepSchedule{Kind::Constant, delta};
}

StepSchedule StepSchedule::clt() { return StepSchedule{Kind::Clt, 0.0}; }
StepSchedule StepSchedule::clt_harmonic() { return StepSchedule{Kind::CltHarmonic, 0.0}; }

double StepSchedule::value_at(std::int64_t k) const {
  switch (kind) {
    case Kind::Constant:
      return delta;
    case Kind::Clt: {
      const double a = std::sqrt(static_cast<double>(k + 1));
      return (a - std::sqrt(static_cast<double>(k))) / a;
    }
    case Kind::CltHarmonic:
      return 1.0 / static_cast<double>(2 * k + 1);
  }
  return 0.0;
}

VectorXd step_transition(const Potential& potential, const NoiseModel& noise,
                         double delta, const VectorXd& x, rng::Stream& stream) {
  if (!(delta > 0.0)) throw std::invalid_argument("step_transition: delta must be positive");
  VectorXd next = x - delta * potential.grad(x) +
                  std::sqrt(2.0 * delta) * noise.sample(x, stream);
  guard_finite(next, -1, -1);
  return next;
}

std::vector<EnsembleSnapshot> run_ensemble(
    const Potential& potential, const NoiseModel& noise,
    const StepSchedule& schedule, int n_chains,
    const std::vector<std::int64_t>& checkpoints, std::uint64_t seed,
    const InitialCloud& p0) {
  if (n_chains < 2) throw std::invalid_argument("run_ensemble: need at least 2 chains");
  check_checkpoints(checkpoints);
  if (schedule.kind == StepSchedule::Kind::Constant && !(schedule.delta > 0.0))
    throw std::invalid_argument("run_ensemble: delta must be strictly positive");

  const int d = potential.dim;
  const std::int64_t k_max = checkpoints.back();
  std::vector<EnsembleSnapshot> out(checkpoints.size());
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    out[c].k = checkpoints[c];
    out[c].points.resize(n_chains, d);
  }

  parallel_for_chunked(static_cast<std::size_t>(n_chains),
                       [&](std::size_t lo, std::size_t hi, std::size_t) {
    for (std::size_t i = lo; i < hi; ++i) {
      const auto chain = static_cast<std::int64_t>(i);
      rng::Stream s(seed, static_cast<std::uint64_t>(chain), kStepRole);
      VectorXd x = initial_point(p0, d, seed, chain);
      std::size_t next_cp = 0;
      if (checkpoints[0] == 0) {
        out[0].points.row(i) = x;
        next_cp = 1;
      }
      VectorXd gx(d);
      for (std::int64_t k = 1; k <= k_max; ++k) {
        const double delta = schedule.value_at(k);
        gx = potential.grad(x);
        x += -delta * gx + std::sqrt(2.0 * delta) * noise.sample(x, s);
        guard_finite(x, chain, k);
        if (next_cp < checkpoints.size() && k == checkpoints[next_cp]) {
          out[next_cp].points.row(i) = x;
          ++next_cp;
        }
      }
    }
  });
  return out;
}

std::pair<VectorXd, VectorXd> coupled_step(const Potential& potential,
                                           const NoiseModel& noise,
                                           double delta, const VectorXd& x,
                                           const VectorXd& y,
                                           rng::Stream& shared_stream) {
  if (!(delta > 0.0)) throw std::invalid_argument("coupled_step: delta must be positive");
  const NoiseDraw eta = noise.draw_eta(shared_stream);
  const double r = std::sqrt(2.0 * delta);
  VectorXd xn = x - delta * potential.grad(x) + r * noise.apply(x, eta);
  VectorXd yn = y - delta * potential.grad(y) + r * noise.apply(y, eta);
  guard_finite(xn, -1, -1);
  guard_finite(yn, -1, -1);
  return {std::move(xn), std::move(yn)};
}

namespace {

// Shared driver for the two CLT-coupled recursions.  `partial_sums` selects
// S_k, otherwise the variable-stepsize chain x_k.
std::vector<EnsembleSnapshot> run_clt_like(
    const NoiseModel& noise, std::int64_t k_max, int n_chains,
    const std::vector<std::int64_t>& checkpoints, std::uint64_t seed,
    const StepSchedule& schedule, bool partial_sums) {
  if (!noise.homogeneous)
    throw std::invalid_argument("clt sequence: noise must be homogeneous");
  const MatrixXd cov0 = noise.covariance(VectorXd::Zero(noise.dim));
  if ((cov0 - MatrixXd::Identity(noise.dim, noise.dim)).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("clt sequence: noise covariance must be I");
  if (n_chains < 2) throw std::invalid_argument("clt sequence: need at least 2 chains");
  check_checkpoints(checkpoints);
  if (checkpoints.back() > k_max)
    throw std::invalid_argument("clt sequence: checkpoint beyond k_max");

  const int d = noise.dim;
  std::vector<EnsembleSnapshot> out(checkpoints.size());
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    out[c].k = checkpoints[c];
    out[c].points.resize(n_chains, d);
  }

  parallel_for_chunked(static_cast<std::size_t>(n_chains),
                       [&](std::size_t lo, std::size_t hi, std::size_t) {
    for (std::size_t i = lo; i < hi; ++i) {
      const auto chain = static_cast<std::int64_t>(i);
      rng::Stream s(seed, static_cast<std::uint64_t>(chain), kStepRole);
      VectorXd x = VectorXd::Zero(d);
      std::size_t next_cp = 0;
      if (checkpoints[0] == 0) {
        out[0].points.row(i) = x;
        next_cp = 1;
      }
      for (std::int64_t k = 1; k <= k_max; ++k) {
        const VectorXd eta = noise.sample(x, s);
        if (partial_sums) {
          // S_k = (sum_{j<=k} eta_j)/sqrt(k), written as a recursion.
          const double rk = std::sqrt(static_cast<double>(k));
          x = (std::sqrt(static_cast<double>(k - 1)) / rk) * x + eta / rk;
        } else {
          const double delta = schedule.value_at(k);
          x = (1.0 - delta) * x + std::sqrt(2.0 * delta) * eta;
        }
        guard_finite(x, chain, k);
        if (next_cp < checkpoints.size() && k == checkpoints[next_cp]) {
          out[next_cp].points.row(i) = x;
          ++next_cp;
        }
      }
    }
  });
  return out;
}

}  // namespace

std::vector<EnsembleSnapshot> run_clt_sequence(
    const NoiseModel& noise, std::int64_t k_max, int n_chains,
    const std::vector<std::int64_t>& checkpoints, std::uint64_t seed,
    const StepSchedule& schedule) {
  if (schedule.kind == StepSchedule::Kind::Constant)
    throw std::invalid_argument("run_clt_sequence: needs a variable-stepsize schedule");
  return run_clt_like(noise, k_max, n_chains, checkpoints, seed, schedule, false);
}

std::vector<EnsembleSnapshot> run_partial_sums(
    const NoiseModel& noise, std::int64_t k_max, int n_chains,
    const std::vector<std::int64_t>& checkpoints, std::uint64_t seed) {
  return run_clt_like(noise, k_max, n_chains, checkpoints, seed,
                      StepSchedule::clt(), true);
}

}  // namespace w2lab
