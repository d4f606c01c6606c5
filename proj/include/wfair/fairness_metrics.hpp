#pragma once

// Accuracy and demographic-disparity metrics over model beliefs.
//
// Predictions are always yhat = 1{s > tau}. Grid-based metrics average over a
// ThresholdGrid (100 midpoints by default); the *_exact variants integrate the
// same quantities over tau ~ U[0,1] piecewise, with no sampling.

#include <map>
#include <span>
#include <vector>

#include "wfair/empirical_ot.hpp"

namespace wfair {

// Beliefs partitioned by group id, with group weights p_a.
class GroupedBeliefs {
 public:
  // Weights default to N_a / N.
  static GroupedBeliefs from_groups(std::map<int, std::vector<double>> groups);
  static GroupedBeliefs from_groups(std::map<int, std::vector<double>> groups, std::map<int, double> weights);
  static GroupedBeliefs from_individuals(std::span<const double> beliefs, std::span<const int> group_of);

  const std::map<int, std::vector<double>>& groups() const noexcept { return groups_; }
  const std::map<int, double>& weights() const noexcept { return weights_; }
  std::size_t group_count() const noexcept { return groups_.size(); }

  std::vector<double> pooled() const;
  std::vector<EmpiricalDist> distributions() const;
  std::vector<double> weight_vector() const;

 private:
  GroupedBeliefs(std::map<int, std::vector<double>> g, std::map<int, double> w)
      : groups_(std::move(g)), weights_(std::move(w)) {}
  std::map<int, std::vector<double>> groups_;
  std::map<int, double> weights_;
};

class LabeledBeliefs {
 public:
  static LabeledBeliefs make(std::vector<double> beliefs, std::vector<int> labels);

  std::span<const double> beliefs() const noexcept { return beliefs_; }
  std::span<const int> labels() const noexcept { return labels_; }

 private:
  LabeledBeliefs(std::vector<double> b, std::vector<int> l) : beliefs_(std::move(b)), labels_(std::move(l)) {}
  std::vector<double> beliefs_;
  std::vector<int> labels_;
};

double error_at(const LabeledBeliefs& lb, double tau);
double error_expected(const LabeledBeliefs& lb, const ThresholdGrid& grid);

// sum_a |P(S_a > tau) - P(S > tau)|, P(S > tau) pooled over all groups.
double demographic_disparity_at(const GroupedBeliefs& g, double tau);
double sdd(const GroupedBeliefs& g, const ThresholdGrid& grid);
// Sum over ordered pairs (a, b), a != b.
double spdd(const GroupedBeliefs& g, const ThresholdGrid& grid);
double sdd_exact(const GroupedBeliefs& g);
double spdd_exact(const GroupedBeliefs& g);
// 2 (|A| - 1) sum_a W1(S_a, bary).
double pseudo_spdd(const GroupedBeliefs& g, const EmpiricalDist& bary);

// The table columns for one method on one split.
struct MetricSummary {
  double err_05 = 0.0;
  double err_exp = 0.0;
  double dd_05 = 0.0;
  double sdd = 0.0;
  double spdd = 0.0;
  double spdd_unordered = 0.0;
  double pseudo_spdd = 0.0;
};

// Grid metrics on `grid`; pseudo-SPDD against the barycenter of the groups
// themselves at `resolution` atoms.
MetricSummary summarize(std::span<const double> beliefs, std::span<const int> labels, std::span<const int> group_of,
                        const ThresholdGrid& grid = ThresholdGrid::midpoints(), std::size_t resolution = 100);

}  // namespace wfair
