#include "wfair/dataset.hpp"

#include <cmath>

#include "wfair/error.hpp"

namespace wfair {

const char* to_string(FeatureMode mode) { return mode == FeatureMode::full ? "full" : "blind"; }

FeatureMode feature_mode_from_string(const std::string& name) {
  if (name == "full") return FeatureMode::full;
  if (name == "blind") return FeatureMode::blind;
  throw Error("unknown feature mode '" + name + "' (expected full or blind)");
}

void Dataset::finalize() {
  group_sizes.clear();
  for (int g : group_of) ++group_sizes[g];
  validate();
}

void Dataset::validate() const {
  require(x.size() == n * d, "dataset feature matrix does not match n x d");
  require(a.size() == n * k, "dataset attribute matrix does not match n x k");
  require(y.size() == n && group_of.size() == n, "dataset columns differ in length");
  require(feature_names.empty() || feature_names.size() == d, "feature names do not match d");
  require(attribute_names.empty() || attribute_names.size() == k, "attribute names do not match k");
  for (int label : y) require(label == 0 || label == 1, "labels must be 0 or 1");
  for (int v : a) require(v >= 0, "sensitive attributes must be nonnegative integers");
  for (double v : x) require(std::isfinite(v), "non-finite feature value");
  std::size_t total = 0;
  for (const auto& [id, size] : group_sizes) {
    require(size > 0, "group " + std::to_string(id) + " is empty");
    total += size;
  }
  require(total == n, "group sizes do not add up to n");
}

std::map<int, double> Dataset::group_weights() const {
  std::map<int, double> w;
  for (const auto& [id, size] : group_sizes) w[id] = static_cast<double>(size) / static_cast<double>(n);
  return w;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.n = rows.size();
  out.d = d;
  out.k = k;
  out.feature_names = feature_names;
  out.attribute_names = attribute_names;
  out.x.reserve(rows.size() * d);
  out.a.reserve(rows.size() * k);
  for (std::size_t r : rows) {
    require(r < n, "subset row out of range");
    const auto xs = features(r);
    const auto as = attributes(r);
    out.x.insert(out.x.end(), xs.begin(), xs.end());
    out.a.insert(out.a.end(), as.begin(), as.end());
    out.y.push_back(y[r]);
    out.group_of.push_back(group_of[r]);
  }
  out.finalize();
  return out;
}

}  // namespace wfair
