#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace wfair {

// Whether the sensitive attributes enter the model's feature vector.
enum class FeatureMode { full, blind };

const char* to_string(FeatureMode mode);
FeatureMode feature_mode_from_string(const std::string& name);

// Encoded individuals: features x (n x d, row-major), sensitive attributes
// a (n x k), binary labels y and a group id per row.
struct Dataset {
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t k = 0;
  std::vector<double> x;
  std::vector<int> a;
  std::vector<int> y;
  std::vector<int> group_of;
  std::map<int, std::size_t> group_sizes;
  std::vector<std::string> feature_names;
  std::vector<std::string> attribute_names;

  std::span<const double> features(std::size_t row) const { return {x.data() + row * d, d}; }
  std::span<const int> attributes(std::size_t row) const { return {a.data() + row * k, k}; }

  // Recomputes group_sizes from group_of, then checks every invariant.
  void finalize();
  void validate() const;

  // p_a = N_a / N.
  std::map<int, double> group_weights() const;
  Dataset subset(std::span<const std::size_t> rows) const;
};

}  // namespace wfair
