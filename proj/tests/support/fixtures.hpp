#pragma once

// Small synthetic datasets shared by the unit and acceptance suites.

#include <cstdint>
#include <random>

#include "wfair/dataset.hpp"

namespace fixture {

// Gaussian features, one sensitive attribute taking `groups` values, labels
// drawn from a logistic model whose intercept shifts with the group so that
// the unconstrained fit produces visibly different group belief distributions.
inline wfair::Dataset synthetic(std::size_t n, std::size_t d, int groups, std::uint64_t seed, double shift = 1.5) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  wfair::Dataset data;
  data.n = n;
  data.d = d;
  data.k = 1;
  for (std::size_t j = 0; j < d; ++j) data.feature_names.push_back("f" + std::to_string(j));
  data.attribute_names = {"g"};
  for (std::size_t r = 0; r < n; ++r) {
    const int g = static_cast<int>(r % static_cast<std::size_t>(groups));
    double z = shift * (g - 0.5 * (groups - 1));
    for (std::size_t j = 0; j < d; ++j) {
      const double v = normal(rng) + 0.5 * g;
      data.x.push_back(v);
      z += (j % 2 ? -0.7 : 0.9) * v;
    }
    data.a.push_back(g);
    data.y.push_back(unit(rng) < 1.0 / (1.0 + std::exp(-z)) ? 1 : 0);
    data.group_of.push_back(g);
  }
  data.finalize();
  return data;
}

}  // namespace fixture
