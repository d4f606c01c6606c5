#include "wfair/post_processor.hpp"

#include <algorithm>

#include "wfair/error.hpp"

namespace wfair {

namespace {

// q(1..B) for one belief list.
std::vector<double> quantile_table(std::vector<double> values, QuantileBins bins) {
  require(!values.empty(), "quantile of an empty belief list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  std::vector<double> table(bins.count);
  for (std::size_t i = 1; i <= bins.count; ++i) table[i - 1] = values[((i - 1) * n) / bins.count];
  return table;
}

std::size_t inverse_from_table(const std::vector<double>& table, double s) {
  const auto at_or_below = std::upper_bound(table.begin(), table.end(), s) - table.begin();
  return at_or_below == 0 ? 1 : static_cast<std::size_t>(at_or_below);
}

}  // namespace

QuantileBins QuantileBins::make(std::size_t count) {
  require(count >= 1, "quantile bin count must be positive");
  return QuantileBins{count};
}

double group_quantile(std::span<const double> beliefs, std::size_t i, QuantileBins bins) {
  require(bins.count >= 1, "quantile bin count must be positive");
  require(i >= 1 && i <= bins.count, "quantile bin index out of range");
  require(!beliefs.empty(), "quantile of an empty belief list");
  std::vector<double> sorted(beliefs.begin(), beliefs.end());
  std::sort(sorted.begin(), sorted.end());
  return sorted[((i - 1) * sorted.size()) / bins.count];
}

std::size_t inverse_quantile(std::span<const double> beliefs, double s, QuantileBins bins) {
  require(bins.count >= 1, "quantile bin count must be positive");
  require(s >= 0.0 && s <= 1.0, "belief out of domain");
  return inverse_from_table(quantile_table({beliefs.begin(), beliefs.end()}, bins), s);
}

const char* to_string(PostTarget target) { return target == PostTarget::barycenter ? "barycenter" : "pooled"; }

PostTarget post_target_from_string(const std::string& name) {
  if (name == "barycenter") return PostTarget::barycenter;
  if (name == "pooled") return PostTarget::pooled;
  throw Error("unknown post-processing target '" + name + "' (expected barycenter or pooled)");
}

EmpiricalDist post_target(const GroupedBeliefs& g, PostTarget target, std::size_t resolution) {
  if (target == PostTarget::pooled) return EmpiricalDist::from_samples(g.pooled());
  return barycenter(g.distributions(), g.weight_vector(), resolution);
}

QuantileMap QuantileMap::fit(const GroupedBeliefs& reference, const EmpiricalDist& target, QuantileBins bins) {
  require(bins.count >= 1, "quantile bin count must be positive");
  QuantileMap map;
  map.bins_ = bins;
  for (const auto& [id, beliefs] : reference.groups()) map.group_tables_[id] = quantile_table(beliefs, bins);
  map.target_table_ = quantile_table({target.atoms().begin(), target.atoms().end()}, bins);
  return map;
}

double QuantileMap::apply(int group, double s) const {
  const auto table = group_tables_.find(group);
  require(table != group_tables_.end(), "quantile map has no group " + std::to_string(group));
  return target_table_[inverse_from_table(table->second, s) - 1];
}

GroupedBeliefs QuantileMap::apply(const GroupedBeliefs& g) const {
  std::map<int, std::vector<double>> mapped;
  for (const auto& [id, beliefs] : g.groups()) {
    auto& out = mapped[id];
    out.reserve(beliefs.size());
    for (double s : beliefs) out.push_back(apply(id, s));
  }
  return GroupedBeliefs::from_groups(std::move(mapped), g.weights());
}

std::vector<double> QuantileMap::apply(std::span<const double> beliefs, std::span<const int> group_of) const {
  require(beliefs.size() == group_of.size(), "beliefs and group ids differ in length");
  std::vector<double> out(beliefs.size());
  for (std::size_t n = 0; n < beliefs.size(); ++n) out[n] = apply(group_of[n], beliefs[n]);
  return out;
}

GroupedBeliefs quantile_match(const GroupedBeliefs& g, const EmpiricalDist& target, QuantileBins bins) {
  return QuantileMap::fit(g, target, bins).apply(g);
}

}  // namespace wfair
