#pragma once

// Slow, independent reference computations used to check the library.

#include <cstddef>
#include <map>
#include <random>
#include <vector>

namespace oracle {

// min over permutations of (1/n) sum |b_i - c_pi(i)|; requires equal sizes.
double permutation_w1(const std::vector<double>& b, const std::vector<double>& c);

// Transport LP optimum for uniform masses, solved as an assignment problem on
// the lcm-expanded instance (Hungarian method).
double assignment_w1(const std::vector<double>& b, const std::vector<double>& c);

// Minimum-cost perfect assignment for a square cost matrix.
double hungarian(const std::vector<std::vector<double>>& cost);

// Exact integral over [0,1] of |F_b - F_c|, F counted directly per piece.
double cdf_gap_integral(const std::vector<double>& b, const std::vector<double>& c);

// Exact integral over (0,1] of |Q_b - Q_c| with Q read off sorted samples.
double quantile_gap_integral(const std::vector<double>& b, const std::vector<double>& c);

// Empirical P(S > tau).
double exceed_rate(const std::vector<double>& s, double tau);

// Exact SPDD (ordered pairs) by integrating pairwise CDF gaps.
double spdd_integral(const std::map<int, std::vector<double>>& groups);

std::vector<double> uniform_samples(std::mt19937_64& rng, std::size_t n, double lo = 0.0, double hi = 1.0);

// Samples drawn from a small set of values so that ties are frequent.
std::vector<double> tied_samples(std::mt19937_64& rng, std::size_t n);

}  // namespace oracle
