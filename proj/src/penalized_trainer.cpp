#include "wfair/penalized_trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wfair/error.hpp"
#include "wfair/fairness_metrics.hpp"

namespace wfair {

namespace {

constexpr double kDivergenceLimit = 1e6;

int sign(double v) { return (v > 0.0) - (v < 0.0); }

std::vector<std::size_t> sorted_by_belief(const std::vector<std::size_t>& rows, std::span<const double> s) {
  std::vector<std::size_t> order = rows;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return s[l] < s[r]; });
  return order;
}

TrajectoryPoint make_point(std::size_t step, const ModelParams& p, const PenalizedProblem& eval_problem,
                           std::span<const int> labels, const EmpiricalDist& bary, double objective) {
  const auto s = beliefs(p, eval_problem.design());
  std::vector<int> group_of(s.size());
  for (const auto& [id, rows] : eval_problem.members()) {
    for (std::size_t r : rows) group_of[r] = id;
  }
  const auto lb = LabeledBeliefs::make(s, {labels.begin(), labels.end()});
  const auto g = GroupedBeliefs::from_individuals(s, group_of);
  const auto grid = ThresholdGrid::midpoints();

  TrajectoryPoint pt;
  pt.step = step;
  pt.err_05 = error_at(lb, 0.5);
  pt.err_exp = error_expected(lb, grid);
  pt.dd_05 = demographic_disparity_at(g, 0.5);
  pt.sdd = sdd(g, grid);
  pt.spdd = spdd(g, grid);
  pt.objective = objective;
  double total = 0.0;
  for (const auto& [id, group] : g.groups()) {
    const double w = wasserstein1(EmpiricalDist::from_samples(group), bary);
    pt.group_w1[id] = w;
    total += w;
  }
  pt.pseudo_spdd = 2.0 * static_cast<double>(g.group_count() - 1) * total;
  return pt;
}

}  // namespace

void TrainConfig::validate() const {
  require(std::isfinite(alpha) && alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0,1]");
  require(std::isfinite(beta) && beta >= 0.0, "beta must be nonnegative");
  require(std::isfinite(eta) && eta > 0.0, "eta must be positive");
  require(resolution >= 1, "resolution must be positive");
  require(log_every >= 1, "log_every must be positive");
}

PenalizedProblem::PenalizedProblem(const Dataset& data, FeatureMode mode)
    : data_(&data), design_(DesignMatrix::build(data, mode)) {
  data.validate();
  for (std::size_t r = 0; r < data.n; ++r) members_[data.group_of[r]].push_back(r);
}

EmpiricalDist PenalizedProblem::barycenter_of(std::span<const double> s, std::size_t resolution) const {
  std::vector<EmpiricalDist> dists;
  std::vector<double> weights;
  for (const auto& [id, rows] : members_) {
    std::vector<double> group(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) group[i] = s[rows[i]];
    dists.push_back(EmpiricalDist::from_samples(std::move(group)));
    weights.push_back(static_cast<double>(rows.size()) / static_cast<double>(data_->n));
  }
  return barycenter(dists, weights, resolution);
}

PenaltyEvaluation PenalizedProblem::evaluate(const ModelParams& p, double alpha, double beta,
                                             const EmpiricalDist& bary, bool with_gradient) const {
  require(!members_.empty(), "penalized objective needs at least one group");
  PenaltyEvaluation out;
  out.beliefs = beliefs(p, design_);
  const auto& s = out.beliefs;
  out.loss = loss(s, data_->y);

  const double penalty_scale = (1.0 - alpha) * beta;
  const auto atoms = bary.atoms();
  const double n_bar = static_cast<double>(atoms.size());
  // Per-individual multiplier of ds/dtheta collected from the couplings.
  std::vector<double> coef(data_->n, 0.0);
  double penalty = 0.0;
  for (const auto& [id, rows] : members_) {
    require(!rows.empty(), "group " + std::to_string(id) + " is empty");
    const auto order = sorted_by_belief(rows, s);
    const double unit = 1.0 / (static_cast<double>(order.size()) * n_bar);
    double w1 = 0.0;
    detail::visit_monotone_coupling(order.size(), atoms.size(), [&](std::size_t i, std::size_t j, unsigned long long units) {
      const double mass = static_cast<double>(units) * unit;
      const double diff = s[order[i]] - atoms[j];
      w1 += mass * std::abs(diff);
      coef[order[i]] += penalty_scale * mass * sign(diff);
      ++out.coupling_terms;
    });
    out.group_w1[id] = w1;
    penalty += w1;
  }
  out.objective = alpha * out.loss + penalty_scale * penalty;

  if (with_gradient) {
    const double inv_n = 1.0 / static_cast<double>(data_->n);
    for (std::size_t n = 0; n < data_->n; ++n) {
      coef[n] = alpha * (s[n] - data_->y[n]) * inv_n + coef[n] * s[n] * (1.0 - s[n]);
    }
    out.gradient = weighted_row_sum(design_, coef);
  }
  return out;
}

double penalized_objective(const ModelParams& p, const Dataset& data, const TrainConfig& cfg,
                           const EmpiricalDist& bary) {
  cfg.validate();
  const PenalizedProblem problem(data, p.mode);
  return problem.evaluate(p, cfg.alpha, cfg.beta, bary, false).objective;
}

std::vector<double> penalized_grad(const ModelParams& p, const Dataset& data, const TrainConfig& cfg,
                                   const EmpiricalDist& bary, std::size_t* coupling_terms) {
  cfg.validate();
  const PenalizedProblem problem(data, p.mode);
  auto eval = problem.evaluate(p, cfg.alpha, cfg.beta, bary, true);
  if (coupling_terms != nullptr) *coupling_terms = eval.coupling_terms;
  return std::move(eval.gradient);
}

TrainResult train(const Dataset& data, const TrainConfig& cfg, const ModelParams& init, const Dataset* held_out,
                  const TrajectorySink& sink) {
  cfg.validate();
  require(init.mode == cfg.mode, "initial parameters use a different feature mode than the config");
  init.validate(data.d, data.k);
  const PenalizedProblem problem(data, cfg.mode);
  const Dataset& eval_data = held_out != nullptr ? *held_out : data;
  const PenalizedProblem eval_problem(eval_data, cfg.mode);

  TrainResult result;
  result.params = init;
  auto& theta = result.params.theta;

  const auto record = [&](std::size_t step, const EmpiricalDist& bary) {
    const double objective = problem.evaluate(result.params, cfg.alpha, cfg.beta, bary, false).objective;
    result.min_objective = std::min(result.min_objective, objective);
    result.trajectory.push_back(make_point(step, result.params, eval_problem, eval_data.y, bary, objective));
    if (sink) sink(result.trajectory.back());
  };

  result.barycenter = problem.barycenter_of(beliefs(result.params, problem.design()), cfg.resolution);
  result.initial_objective = problem.evaluate(result.params, cfg.alpha, cfg.beta, result.barycenter, false).objective;
  result.min_objective = result.initial_objective;
  record(0, result.barycenter);

  const std::size_t period = cfg.refresh_period();
  for (std::size_t m = 1; m <= cfg.steps; ++m) {
    if (m > 1 && (m - 1) % period == 0) {
      result.barycenter = problem.barycenter_of(beliefs(result.params, problem.design()), cfg.resolution);
    }
    const auto eval = problem.evaluate(result.params, cfg.alpha, cfg.beta, result.barycenter, true);
    if (!std::isfinite(eval.objective) || eval.objective > kDivergenceLimit) {
      throw Error("training diverged; reduce eta");
    }
    result.min_objective = std::min(result.min_objective, eval.objective);
    result.max_coupling_terms = std::max(result.max_coupling_terms, eval.coupling_terms);
    for (std::size_t j = 0; j < theta.size(); ++j) theta[j] -= cfg.eta * eval.gradient[j];
    for (double v : theta) {
      if (!std::isfinite(v)) throw Error("training diverged; reduce eta");
    }
    if (m % cfg.log_every == 0 || m == cfg.steps) record(m, result.barycenter);
  }
  return result;
}

}  // namespace wfair
