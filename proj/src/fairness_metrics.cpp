#include "wfair/fairness_metrics.hpp"

#include <algorithm>
#include <cmath>

#include "wfair/error.hpp"

namespace wfair {

namespace {

void check_beliefs(const std::vector<double>& v) {
  for (double s : v) require(std::isfinite(s) && s >= 0.0 && s <= 1.0, "belief out of domain");
}

// Fraction of the sorted list strictly above tau.
double exceed_rate(const std::vector<double>& sorted, double tau) {
  const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), tau);
  return static_cast<double>(above) / static_cast<double>(sorted.size());
}

std::vector<std::vector<double>> sorted_groups(const GroupedBeliefs& g) {
  std::vector<std::vector<double>> out;
  out.reserve(g.group_count());
  for (const auto& [id, beliefs] : g.groups()) {
    out.push_back(beliefs);
    std::sort(out.back().begin(), out.back().end());
  }
  return out;
}

std::vector<double> sorted_pooled(const GroupedBeliefs& g) {
  auto pooled = g.pooled();
  std::sort(pooled.begin(), pooled.end());
  return pooled;
}

}  // namespace

GroupedBeliefs GroupedBeliefs::from_groups(std::map<int, std::vector<double>> groups) {
  std::size_t total = 0;
  for (const auto& [id, beliefs] : groups) total += beliefs.size();
  std::map<int, double> weights;
  for (const auto& [id, beliefs] : groups) {
    weights[id] = total == 0 ? 0.0 : static_cast<double>(beliefs.size()) / static_cast<double>(total);
  }
  return from_groups(std::move(groups), std::move(weights));
}

GroupedBeliefs GroupedBeliefs::from_groups(std::map<int, std::vector<double>> groups, std::map<int, double> weights) {
  require(!groups.empty(), "grouped beliefs need at least one group");
  double total = 0.0;
  for (const auto& [id, beliefs] : groups) {
    require(!beliefs.empty(), "group " + std::to_string(id) + " is empty");
    check_beliefs(beliefs);
    const auto w = weights.find(id);
    require(w != weights.end(), "group " + std::to_string(id) + " has no weight");
    require(w->second >= 0.0, "group weights must be nonnegative");
    total += w->second;
  }
  require(weights.size() == groups.size(), "group weights name unknown groups");
  require(std::abs(total - 1.0) <= 1e-9, "group weights must sum to 1");
  return GroupedBeliefs(std::move(groups), std::move(weights));
}

GroupedBeliefs GroupedBeliefs::from_individuals(std::span<const double> beliefs, std::span<const int> group_of) {
  require(beliefs.size() == group_of.size(), "beliefs and group ids differ in length");
  std::map<int, std::vector<double>> groups;
  for (std::size_t n = 0; n < beliefs.size(); ++n) groups[group_of[n]].push_back(beliefs[n]);
  return from_groups(std::move(groups));
}

std::vector<double> GroupedBeliefs::pooled() const {
  std::vector<double> out;
  for (const auto& [id, beliefs] : groups_) out.insert(out.end(), beliefs.begin(), beliefs.end());
  return out;
}

std::vector<EmpiricalDist> GroupedBeliefs::distributions() const {
  std::vector<EmpiricalDist> out;
  out.reserve(groups_.size());
  for (const auto& [id, beliefs] : groups_) out.push_back(EmpiricalDist::from_samples(beliefs));
  return out;
}

std::vector<double> GroupedBeliefs::weight_vector() const {
  std::vector<double> out;
  out.reserve(weights_.size());
  for (const auto& [id, w] : weights_) out.push_back(w);
  return out;
}

LabeledBeliefs LabeledBeliefs::make(std::vector<double> beliefs, std::vector<int> labels) {
  require(!beliefs.empty(), "labeled beliefs are empty");
  require(beliefs.size() == labels.size(), "beliefs and labels differ in length");
  check_beliefs(beliefs);
  for (int y : labels) require(y == 0 || y == 1, "labels must be 0 or 1");
  return LabeledBeliefs(std::move(beliefs), std::move(labels));
}

double error_at(const LabeledBeliefs& lb, double tau) {
  require(tau >= 0.0 && tau <= 1.0, "threshold outside [0,1]");
  const auto s = lb.beliefs();
  const auto y = lb.labels();
  std::size_t wrong = 0;
  for (std::size_t n = 0; n < s.size(); ++n) wrong += (s[n] > tau ? 1 : 0) != y[n] ? 1 : 0;
  return static_cast<double>(wrong) / static_cast<double>(s.size());
}

double error_expected(const LabeledBeliefs& lb, const ThresholdGrid& grid) {
  double total = 0.0;
  for (double tau : grid.values()) total += error_at(lb, tau);
  return total / static_cast<double>(grid.count());
}

double demographic_disparity_at(const GroupedBeliefs& g, double tau) {
  require(tau >= 0.0 && tau <= 1.0, "threshold outside [0,1]");
  const auto pooled = sorted_pooled(g);
  const double pooled_rate = exceed_rate(pooled, tau);
  double total = 0.0;
  for (const auto& group : sorted_groups(g)) total += std::abs(exceed_rate(group, tau) - pooled_rate);
  return total;
}

double sdd(const GroupedBeliefs& g, const ThresholdGrid& grid) {
  const auto pooled = sorted_pooled(g);
  const auto groups = sorted_groups(g);
  double total = 0.0;
  for (double tau : grid.values()) {
    const double pooled_rate = exceed_rate(pooled, tau);
    for (const auto& group : groups) total += std::abs(exceed_rate(group, tau) - pooled_rate);
  }
  return total / static_cast<double>(grid.count());
}

double spdd(const GroupedBeliefs& g, const ThresholdGrid& grid) {
  const auto groups = sorted_groups(g);
  std::vector<double> rates(groups.size());
  double total = 0.0;
  for (double tau : grid.values()) {
    for (std::size_t a = 0; a < groups.size(); ++a) rates[a] = exceed_rate(groups[a], tau);
    for (std::size_t a = 0; a < groups.size(); ++a) {
      for (std::size_t b = a + 1; b < groups.size(); ++b) total += 2.0 * std::abs(rates[a] - rates[b]);
    }
  }
  return total / static_cast<double>(grid.count());
}

double sdd_exact(const GroupedBeliefs& g) {
  const auto pooled = EmpiricalDist::from_samples(g.pooled());
  double total = 0.0;
  for (const auto& d : g.distributions()) total += threshold_disparity(d, pooled);
  return total;
}

double spdd_exact(const GroupedBeliefs& g) {
  const auto dists = g.distributions();
  double total = 0.0;
  for (std::size_t a = 0; a < dists.size(); ++a) {
    for (std::size_t b = a + 1; b < dists.size(); ++b) total += 2.0 * threshold_disparity(dists[a], dists[b]);
  }
  return total;
}

double pseudo_spdd(const GroupedBeliefs& g, const EmpiricalDist& bary) {
  double total = 0.0;
  for (const auto& d : g.distributions()) total += wasserstein1(d, bary);
  return 2.0 * static_cast<double>(g.group_count() - 1) * total;
}

MetricSummary summarize(std::span<const double> beliefs, std::span<const int> labels, std::span<const int> group_of,
                        const ThresholdGrid& grid, std::size_t resolution) {
  const auto lb = LabeledBeliefs::make({beliefs.begin(), beliefs.end()}, {labels.begin(), labels.end()});
  const auto g = GroupedBeliefs::from_individuals(beliefs, group_of);
  MetricSummary m;
  m.err_05 = error_at(lb, 0.5);
  m.err_exp = error_expected(lb, grid);
  m.dd_05 = demographic_disparity_at(g, 0.5);
  m.sdd = sdd(g, grid);
  m.spdd = spdd(g, grid);
  m.spdd_unordered = 0.5 * m.spdd;
  const auto dists = g.distributions();
  const auto weights = g.weight_vector();
  m.pseudo_spdd = pseudo_spdd(g, barycenter(dists, weights, resolution));
  return m;
}

}  // namespace wfair
