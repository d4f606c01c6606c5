#pragma once

// Gradient descent on the Wasserstein-1 penalized logistic objective
//
//   J(theta) = alpha * CE(theta) + (1 - alpha) * beta * sum_a W1(S_a, bary)
//
// The penalty subgradient flows through the optimal couplings between each
// group's beliefs and the barycenter atoms; the barycenter is held constant
// between refreshes.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wfair/dataset.hpp"
#include "wfair/empirical_ot.hpp"
#include "wfair/logistic_model.hpp"

namespace wfair {

struct TrainConfig {
  double alpha = 0.0;
  double beta = 1.0;
  double eta = 1e-2;
  std::size_t steps = 80000;
  // Barycenter refresh period; 0 means steps + 1 (computed once).
  std::size_t refresh = 0;
  std::size_t resolution = 100;
  FeatureMode mode = FeatureMode::full;
  std::uint64_t seed = 0;
  std::size_t log_every = 100;

  void validate() const;
  std::size_t refresh_period() const { return refresh == 0 ? steps + 1 : refresh; }
};

struct TrajectoryPoint {
  std::size_t step = 0;
  double err_05 = 0.0;
  double err_exp = 0.0;
  double dd_05 = 0.0;
  double sdd = 0.0;
  double spdd = 0.0;
  double pseudo_spdd = 0.0;
  double objective = 0.0;
  // W1 from each evaluated group to the current barycenter, by group id.
  std::map<int, double> group_w1;
};

// Objective value, subgradient and bookkeeping at one parameter vector.
struct PenaltyEvaluation {
  double objective = 0.0;
  double loss = 0.0;
  std::map<int, double> group_w1;
  std::vector<double> gradient;
  std::size_t coupling_terms = 0;
  std::vector<double> beliefs;
};

// Per-dataset state reused across steps: design matrix and group membership.
// Holds a reference to `data`, which must outlive the problem.
class PenalizedProblem {
 public:
  PenalizedProblem(const Dataset& data, FeatureMode mode);

  const DesignMatrix& design() const noexcept { return design_; }
  const std::map<int, std::vector<std::size_t>>& members() const noexcept { return members_; }

  PenaltyEvaluation evaluate(const ModelParams& p, double alpha, double beta, const EmpiricalDist& bary,
                             bool with_gradient) const;

  // Barycenter of the current group belief distributions, weights N_a / N.
  EmpiricalDist barycenter_of(std::span<const double> beliefs, std::size_t resolution) const;

 private:
  const Dataset* data_;
  DesignMatrix design_;
  std::map<int, std::vector<std::size_t>> members_;
};

double penalized_objective(const ModelParams& p, const Dataset& data, const TrainConfig& cfg,
                           const EmpiricalDist& bary);

// coupling_terms, if given, receives the number of coupling entries visited.
std::vector<double> penalized_grad(const ModelParams& p, const Dataset& data, const TrainConfig& cfg,
                                   const EmpiricalDist& bary, std::size_t* coupling_terms = nullptr);

struct TrainResult {
  ModelParams params;
  std::vector<TrajectoryPoint> trajectory;
  EmpiricalDist barycenter = EmpiricalDist::from_sorted({0.5});
  double initial_objective = 0.0;
  double min_objective = 0.0;
  std::size_t max_coupling_terms = 0;
};

using TrajectorySink = std::function<void(const TrajectoryPoint&)>;

// Runs cfg.steps updates theta <- theta - eta * grad from `init`. Trajectory
// points are computed on `held_out` (the training data if absent) at step 0,
// every log_every steps, and at the final step. Throws
// "training diverged; reduce eta" on a non-finite or exploding objective.
TrainResult train(const Dataset& data, const TrainConfig& cfg, const ModelParams& init,
                  const Dataset* held_out = nullptr, const TrajectorySink& sink = {});

}  // namespace wfair
