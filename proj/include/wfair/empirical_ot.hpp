#pragma once

// Exact optimal transport between empirical distributions on the unit interval.
//
// Every distribution here is a sorted list of atoms, each carrying mass 1/n.
// On the line the optimal coupling is the monotone one, so Wasserstein-1
// distances, couplings and barycenters are all computed by merging sorted
// lists; no LP or entropic solver is involved. Integrals over thresholds are
// evaluated exactly on the piecewise-constant breakpoints.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace wfair {

class EmpiricalDist {
 public:
  // Sorts the samples. Throws "empty distribution" / "belief out of domain".
  static EmpiricalDist from_samples(std::vector<double> samples);
  // Same checks; caller guarantees ascending order.
  static EmpiricalDist from_sorted(std::vector<double> atoms);

  std::span<const double> atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  double atom_mass() const noexcept { return 1.0 / static_cast<double>(atoms_.size()); }
  double front() const noexcept { return atoms_.front(); }
  double back() const noexcept { return atoms_.back(); }

  friend bool operator==(const EmpiricalDist&, const EmpiricalDist&) = default;

 private:
  explicit EmpiricalDist(std::vector<double> atoms) : atoms_(std::move(atoms)) {}
  std::vector<double> atoms_;
};

inline EmpiricalDist make_dist(std::vector<double> samples) {
  return EmpiricalDist::from_samples(std::move(samples));
}

struct CouplingEntry {
  std::size_t row;
  std::size_t col;
  double mass;
};

// Sparse transport plan between two empirical distributions, indexed by
// sorted atom position.
struct Coupling {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<CouplingEntry> entries;
};

// Thresholds used for reported metrics; never for the exact integrals below.
class ThresholdGrid {
 public:
  // tau_k = (k - 0.5) / count, k = 1..count.
  static ThresholdGrid midpoints(std::size_t count = 100);
  // Strictly increasing values in (0,1).
  static ThresholdGrid from_values(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t count() const noexcept { return values_.size(); }

 private:
  explicit ThresholdGrid(std::vector<double> v) : values_(std::move(v)) {}
  std::vector<double> values_;
};

// Right-continuous empirical CDF: (# atoms <= x) / n.
double cdf_at(const EmpiricalDist& d, double x);

// Generalized inverse CDF: smallest atom v with cdf_at(d, v) >= t, t in (0,1].
double quantile_at(const EmpiricalDist& d, double t);

// Monotone (north-west corner) coupling of the sorted atom lists. Masses are
// formed from integer units of 1/(n_b * n_c), so marginals are exact up to a
// single rounding per entry.
Coupling optimal_coupling(const EmpiricalDist& b, const EmpiricalDist& c);

// Transport cost of the optimal coupling.
double wasserstein1(const EmpiricalDist& b, const EmpiricalDist& c);

// Integral over t in (0,1] of |Q_b(t) - Q_c(t)| on the merged breakpoints
// {i/n_b} U {j/n_c}.
double wasserstein1_quantile_form(const EmpiricalDist& b, const EmpiricalDist& c);

// Integral over tau in [0,1] of |F_b(tau) - F_c(tau)|, piecewise on the merged
// atom positions.
double threshold_disparity(const EmpiricalDist& b, const EmpiricalDist& c);

// Expected number of threshold-decision flips (tau ~ U[0,1]) when b is moved
// onto c along the optimal coupling.
double expected_flip_cost(const EmpiricalDist& b, const EmpiricalDist& c);

// Lower weighted median: smallest value whose cumulative weight reaches 1/2.
double lower_weighted_median(std::span<const double> values, std::span<const double> weights);

// Weighted W1 barycenter. Atom j is the lower weighted median of the group
// quantiles at t_j = (j - 0.5) / resolution. When resolution is a multiple of
// every input size this is an exact minimizer over all distributions.
EmpiricalDist barycenter(std::span<const EmpiricalDist> dists, std::span<const double> weights,
                         std::size_t resolution = 100);

// sum_a weight_a * W1(dist_a, target).
double barycenter_cost(std::span<const EmpiricalDist> dists, std::span<const double> weights,
                       const EmpiricalDist& target);

}  // namespace wfair

namespace wfair::detail {

// Walks the monotone coupling of two ascending atom lists, calling
// visit(row, col, units) where units counts multiples of 1/(n_b * n_c).
// Emits at most n_b + n_c - 1 entries.
template <class Visit>
void visit_monotone_coupling(std::size_t n_b, std::size_t n_c, Visit&& visit) {
  const unsigned long long row_units = n_c;
  const unsigned long long col_units = n_b;
  unsigned long long row_left = row_units;
  unsigned long long col_left = col_units;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < n_b && j < n_c) {
    const unsigned long long take = row_left < col_left ? row_left : col_left;
    visit(i, j, take);
    row_left -= take;
    col_left -= take;
    if (row_left == 0) {
      ++i;
      row_left = row_units;
    }
    if (col_left == 0) {
      ++j;
      col_left = col_units;
    }
  }
}

}  // namespace wfair::detail
