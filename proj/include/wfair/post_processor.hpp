#pragma once

// Quantile matching of group beliefs onto a target distribution.
//
// For bin count B and a belief list with sorted values x[0..n-1]:
//   q(i)      = sup{ s : F(s) <= (i-1)/B } = x[floor((i-1) n / B)],  i = 1..B
//   q^-1(s)   = max{ i : q(i) <= s }, or 1 when s is below every q(i)
// and a belief s of group a is mapped to q_target(q_a^-1(s)).

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "wfair/empirical_ot.hpp"
#include "wfair/fairness_metrics.hpp"

namespace wfair {

struct QuantileBins {
  std::size_t count = 100;

  static QuantileBins make(std::size_t count);
};

double group_quantile(std::span<const double> beliefs, std::size_t i, QuantileBins bins);
std::size_t inverse_quantile(std::span<const double> beliefs, double s, QuantileBins bins);

enum class PostTarget { barycenter, pooled };

const char* to_string(PostTarget target);
PostTarget post_target_from_string(const std::string& name);

// Barycenter of the group distributions or the pooled belief distribution.
EmpiricalDist post_target(const GroupedBeliefs& g, PostTarget target, std::size_t resolution = 100);

// Per-group quantile tables fitted on one set of beliefs, applicable to any
// other beliefs of the same groups.
class QuantileMap {
 public:
  static QuantileMap fit(const GroupedBeliefs& reference, const EmpiricalDist& target, QuantileBins bins);

  double apply(int group, double s) const;
  GroupedBeliefs apply(const GroupedBeliefs& g) const;
  std::vector<double> apply(std::span<const double> beliefs, std::span<const int> group_of) const;

  QuantileBins bins() const noexcept { return bins_; }

 private:
  QuantileBins bins_;
  std::map<int, std::vector<double>> group_tables_;
  std::vector<double> target_table_;
};

GroupedBeliefs quantile_match(const GroupedBeliefs& g, const EmpiricalDist& target, QuantileBins bins);

}  // namespace wfair
