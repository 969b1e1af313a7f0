#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "w2lab/model.hpp"
#include "w2lab/rng.hpp"

namespace w2lab {

// Stepsize sequence delta_k indexed by the step about to be taken
// (the move from x_{k-1} to x_k uses value_at(k), k >= 1).
struct StepSchedule {
  enum class Kind { Constant, Clt, CltHarmonic };
  Kind kind = Kind::Constant;
  double delta = 0.0;

  static StepSchedule constant(double delta);
  static StepSchedule clt();           // (sqrt(k+1) - sqrt(k)) / sqrt(k+1)
  static StepSchedule clt_harmonic();  // 1/(2k+1) variant

  double value_at(std::int64_t k) const;
};

struct EnsembleSnapshot {
  std::int64_t k = 0;
  MatrixXd points;  // n_chains x dim, row i = chain i
};

struct InitialCloud {
  enum class Kind { PointMass, Gaussian };
  Kind kind = Kind::PointMass;
  double scale = 1.0;  // stddev for the Gaussian option
};

// Thrown when a chain iterate blows up or stops being finite.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::int64_t chain, std::int64_t step, double norm);
  std::int64_t chain_id;
  std::int64_t step;
};

// One transition x - delta grad U(x) + sqrt(2 delta) T_eta(x).
VectorXd step_transition(const Potential& potential, const NoiseModel& noise,
                         double delta, const VectorXd& x, rng::Stream& stream);

// Independent chains under a shared schedule; snapshot at each checkpoint
// (checkpoint 0 is the initial cloud).  Bitwise deterministic in
// (seed, n_chains) regardless of the worker count.
std::vector<EnsembleSnapshot> run_ensemble(
    const Potential& potential, const NoiseModel& noise,
    const StepSchedule& schedule, int n_chains,
    const std::vector<std::int64_t>& checkpoints, std::uint64_t seed,
    const InitialCloud& p0 = {});

// Advances two states with the same noise realisation (synchronous coupling).
std::pair<VectorXd, VectorXd> coupled_step(const Potential& potential,
                                           const NoiseModel& noise,
                                           double delta, const VectorXd& x,
                                           const VectorXd& y,
                                           rng::Stream& shared_stream);

// Variable-stepsize chain x_{k+1} = (1 - delta_{k+1}) x_k + sqrt(2 delta_{k+1}) eta_{k+1}
// started at 0, for homogeneous unit-covariance noise.
std::vector<EnsembleSnapshot> run_clt_sequence(
    const NoiseModel& noise, std::int64_t k_max, int n_chains,
    const std::vector<std::int64_t>& checkpoints, std::uint64_t seed,
    const StepSchedule& schedule = StepSchedule::clt());

// Normalised partial sums S_{k+1} = (sqrt(k)/sqrt(k+1)) S_k + eta_{k+1}/sqrt(k+1).
// Consumes the same eta stream as run_clt_sequence for the same seed, which is
// what makes E|x_k - S_k|^2 a synchronous-coupling quantity.
std::vector<EnsembleSnapshot> run_partial_sums(
    const NoiseModel& noise, std::int64_t k_max, int n_chains,
    const std::vector<std::int64_t>& checkpoints, std::uint64_t seed);

}  // namespace w2lab
