#include "wfair/empirical_ot.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "wfair/error.hpp"

namespace wfair {

namespace {

void check_atoms(const std::vector<double>& atoms) {
  require(!atoms.empty(), "empty distribution");
  for (double v : atoms) {
    require(std::isfinite(v) && v >= 0.0 && v <= 1.0, "belief out of domain");
  }
}

void check_weights(std::span<const EmpiricalDist> dists, std::span<const double> weights) {
  require(!dists.empty(), "barycenter needs at least one distribution");
  require(dists.size() == weights.size(), "barycenter weights and distributions differ in length");
  double total = 0.0;
  for (double w : weights) {
    require(std::isfinite(w) && w >= 0.0, "barycenter weights must be nonnegative");
    total += w;
  }
  require(std::abs(total - 1.0) <= 1e-9, "barycenter weights must sum to 1");
}

}  // namespace

EmpiricalDist EmpiricalDist::from_samples(std::vector<double> samples) {
  check_atoms(samples);
  std::sort(samples.begin(), samples.end());
  return EmpiricalDist(std::move(samples));
}

EmpiricalDist EmpiricalDist::from_sorted(std::vector<double> atoms) {
  check_atoms(atoms);
  require(std::is_sorted(atoms.begin(), atoms.end()), "atoms must be sorted");
  return EmpiricalDist(std::move(atoms));
}

ThresholdGrid ThresholdGrid::midpoints(std::size_t count) {
  require(count >= 1, "threshold grid needs at least one value");
  std::vector<double> v(count);
  for (std::size_t k = 0; k < count; ++k) {
    v[k] = (static_cast<double>(k) + 0.5) / static_cast<double>(count);
  }
  return ThresholdGrid(std::move(v));
}

ThresholdGrid ThresholdGrid::from_values(std::vector<double> values) {
  require(!values.empty(), "threshold grid needs at least one value");
  for (std::size_t k = 0; k < values.size(); ++k) {
    require(values[k] > 0.0 && values[k] < 1.0, "threshold outside (0,1)");
    require(k == 0 || values[k] > values[k - 1], "thresholds must be strictly increasing");
  }
  return ThresholdGrid(std::move(values));
}

double cdf_at(const EmpiricalDist& d, double x) {
  const auto atoms = d.atoms();
  const auto count = std::upper_bound(atoms.begin(), atoms.end(), x) - atoms.begin();
  return static_cast<double>(count) / static_cast<double>(atoms.size());
}

double quantile_at(const EmpiricalDist& d, double t) {
  require(t > 0.0 && t <= 1.0, "quantile level outside (0,1]");
  const auto n = static_cast<double>(d.size());
  // t * n lands a few ulps above an integer for t = k/n; shave that off.
  const double rank = std::ceil(t * n - 1e-12 * n);
  const auto index = static_cast<std::size_t>(std::clamp(rank, 1.0, n)) - 1;
  return d.atoms()[index];
}

Coupling optimal_coupling(const EmpiricalDist& b, const EmpiricalDist& c) {
  Coupling plan;
  plan.n_rows = b.size();
  plan.n_cols = c.size();
  plan.entries.reserve(b.size() + c.size() - 1);
  const double unit = 1.0 / (static_cast<double>(b.size()) * static_cast<double>(c.size()));
  detail::visit_monotone_coupling(b.size(), c.size(),
                                  [&](std::size_t i, std::size_t j, unsigned long long units) {
                                    plan.entries.push_back({i, j, static_cast<double>(units) * unit});
                                  });
  return plan;
}

double wasserstein1(const EmpiricalDist& b, const EmpiricalDist& c) {
  const auto plan = optimal_coupling(b, c);
  const auto bs = b.atoms();
  const auto cs = c.atoms();
  double cost = 0.0;
  for (const auto& e : plan.entries) cost += e.mass * std::abs(bs[e.row] - cs[e.col]);
  return cost;
}

double wasserstein1_quantile_form(const EmpiricalDist& b, const EmpiricalDist& c) {
  // Breakpoints i/n_b and j/n_c, compared exactly as i*n_c vs j*n_b.
  const unsigned long long nb = b.size();
  const unsigned long long nc = c.size();
  const double denom = static_cast<double>(nb) * static_cast<double>(nc);
  unsigned long long i = 1;
  unsigned long long j = 1;
  unsigned long long prev = 0;
  double total = 0.0;
  while (i <= nb || j <= nc) {
    const unsigned long long next_b = i <= nb ? i * nc : ~0ULL;
    const unsigned long long next_c = j <= nc ? j * nb : ~0ULL;
    const unsigned long long next = std::min(next_b, next_c);
    if (next > prev) {
      const double mid = (static_cast<double>(prev) + static_cast<double>(next)) / (2.0 * denom);
      const double width = static_cast<double>(next - prev) / denom;
      total += width * std::abs(quantile_at(b, mid) - quantile_at(c, mid));
    }
    prev = next;
    if (next_b == next) ++i;
    if (next_c == next) ++j;
  }
  return total;
}

double threshold_disparity(const EmpiricalDist& b, const EmpiricalDist& c) {
  const auto bs = b.atoms();
  const auto cs = c.atoms();
  const long long nb = static_cast<long long>(bs.size());
  const long long nc = static_cast<long long>(cs.size());
  const double denom = static_cast<double>(nb) * static_cast<double>(nc);
  std::size_t i = 0;
  std::size_t j = 0;
  double total = 0.0;
  // Both CDFs vanish left of the first atom and equal 1 right of the last, so
  // only the gaps between consecutive merged positions contribute.
  double position = std::min(bs.front(), cs.front());
  while (i < bs.size() || j < cs.size()) {
    while (i < bs.size() && bs[i] <= position) ++i;
    while (j < cs.size() && cs[j] <= position) ++j;
    const double next = std::min(i < bs.size() ? bs[i] : 1.0, j < cs.size() ? cs[j] : 1.0);
    if (i == bs.size() && j == cs.size()) break;
    const long long gap = static_cast<long long>(i) * nc - static_cast<long long>(j) * nb;
    total += (next - position) * static_cast<double>(gap < 0 ? -gap : gap) / denom;
    position = next;
  }
  return total;
}

double expected_flip_cost(const EmpiricalDist& b, const EmpiricalDist& c) {
  const auto plan = optimal_coupling(b, c);
  const auto bs = b.atoms();
  const auto cs = c.atoms();
  double total = 0.0;
  for (const auto& e : plan.entries) {
    // A threshold flips the decision 1{s > tau} iff tau lies in [min, max).
    const double lo = std::max(0.0, std::min(bs[e.row], cs[e.col]));
    const double hi = std::min(1.0, std::max(bs[e.row], cs[e.col]));
    total += e.mass * std::max(0.0, hi - lo);
  }
  return total;
}

double lower_weighted_median(std::span<const double> values, std::span<const double> weights) {
  require(!values.empty() && values.size() == weights.size(), "weighted median needs matching nonempty inputs");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return values[l] < values[r]; });
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  const double half = 0.5 * total * (1.0 - 1e-12);
  double cumulative = 0.0;
  for (std::size_t k : order) {
    cumulative += weights[k];
    if (cumulative >= half) return values[k];
  }
  return values[order.back()];
}

EmpiricalDist barycenter(std::span<const EmpiricalDist> dists, std::span<const double> weights,
                         std::size_t resolution) {
  check_weights(dists, weights);
  require(resolution >= 1, "barycenter resolution must be positive");
  std::vector<double> atoms(resolution);
  std::vector<double> level(dists.size());
  for (std::size_t j = 0; j < resolution; ++j) {
    const double t = (static_cast<double>(j) + 0.5) / static_cast<double>(resolution);
    for (std::size_t a = 0; a < dists.size(); ++a) level[a] = quantile_at(dists[a], t);
    atoms[j] = lower_weighted_median(level, weights);
  }
  return EmpiricalDist::from_sorted(std::move(atoms));
}

double barycenter_cost(std::span<const EmpiricalDist> dists, std::span<const double> weights,
                       const EmpiricalDist& target) {
  check_weights(dists, weights);
  double cost = 0.0;
  for (std::size_t a = 0; a < dists.size(); ++a) cost += weights[a] * wasserstein1(dists[a], target);
  return cost;
}

}  // namespace wfair
