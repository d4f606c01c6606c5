#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace oracle {

double permutation_w1(const std::vector<double>& b, const std::vector<double>& c) {
  std::vector<std::size_t> perm(c.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) cost += std::abs(b[i] - c[perm[i]]);
    best = std::min(best, cost / static_cast<double>(b.size()));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double hungarian(const std::vector<std::vector<double>>& cost) {
  // Potentials formulation, 1-based, O(n^3).
  const std::size_t n = cost.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (std::size_t j = 1; j <= n; ++j) total += cost[p[j] - 1][j - 1];
  return total;
}

double assignment_w1(const std::vector<double>& b, const std::vector<double>& c) {
  const std::size_t l = std::lcm(b.size(), c.size());
  std::vector<double> eb, ec;
  for (double v : b) eb.insert(eb.end(), l / b.size(), v);
  for (double v : c) ec.insert(ec.end(), l / c.size(), v);
  std::vector<std::vector<double>> cost(l, std::vector<double>(l));
  for (std::size_t i = 0; i < l; ++i) {
    for (std::size_t j = 0; j < l; ++j) cost[i][j] = std::abs(eb[i] - ec[j]);
  }
  return hungarian(cost) / static_cast<double>(l);
}

namespace {

double cdf(const std::vector<double>& s, double x) {
  std::size_t count = 0;
  for (double v : s) count += v <= x ? 1 : 0;
  return static_cast<double>(count) / static_cast<double>(s.size());
}

}  // namespace

double cdf_gap_integral(const std::vector<double>& b, const std::vector<double>& c) {
  std::vector<double> cuts = {0.0, 1.0};
  cuts.insert(cuts.end(), b.begin(), b.end());
  cuts.insert(cuts.end(), c.begin(), c.end());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    // Both CDFs are constant on [cuts[i], cuts[i+1]).
    total += std::abs(cdf(b, cuts[i]) - cdf(c, cuts[i])) * (cuts[i + 1] - cuts[i]);
  }
  return total;
}

double quantile_gap_integral(const std::vector<double>& b, const std::vector<double>& c) {
  std::vector<double> sb = b, sc = c;
  std::sort(sb.begin(), sb.end());
  std::sort(sc.begin(), sc.end());
  // Breakpoints i/nb and j/nc compared as integers over the common denominator nb*nc.
  const std::size_t nb = sb.size(), nc = sc.size();
  std::vector<std::size_t> cuts;
  for (std::size_t i = 0; i <= nb; ++i) cuts.push_back(i * nc);
  for (std::size_t j = 0; j <= nc; ++j) cuts.push_back(j * nb);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double total = 0.0;
  const double denom = static_cast<double>(nb * nc);
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    // On (cuts[k], cuts[k+1]] the quantile index is cuts[k] / nc for b.
    const double qb = sb[cuts[k] / nc];
    const double qc = sc[cuts[k] / nb];
    total += std::abs(qb - qc) * static_cast<double>(cuts[k + 1] - cuts[k]) / denom;
  }
  return total;
}

double exceed_rate(const std::vector<double>& s, double tau) { return 1.0 - cdf(s, tau); }

double spdd_integral(const std::map<int, std::vector<double>>& groups) {
  double total = 0.0;
  for (const auto& [a, sa] : groups) {
    for (const auto& [b, sb] : groups) {
      if (a != b) total += cdf_gap_integral(sa, sb);
    }
  }
  return total;
}

std::vector<double> uniform_samples(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> out(n);
  for (auto& v : out) v = u(rng);
  return out;
}

std::vector<double> tied_samples(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> pick(0, 10);
  std::vector<double> out(n);
  for (auto& v : out) v = pick(rng) / 10.0;
  return out;
}

}  // namespace oracle
