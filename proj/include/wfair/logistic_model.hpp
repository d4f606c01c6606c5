#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wfair/dataset.hpp"

namespace wfair {

struct ModelParams {
  std::vector<double> theta;
  FeatureMode mode = FeatureMode::full;

  static ModelParams zeros(std::size_t d, std::size_t k, FeatureMode mode);
  void validate(std::size_t d, std::size_t k) const;
};

// d + k + 1 in full mode, d + 1 when blind.
std::size_t feature_dim(std::size_t d, std::size_t k, FeatureMode mode);

// full: (x, a, 1); blind: (x, 1).
std::vector<double> assemble_features(std::span<const double> x, std::span<const int> a, FeatureMode mode);
std::vector<double> assemble_features(std::span<const double> x, std::span<const int> a, FeatureMode mode,
                                      std::size_t expected_d, std::size_t expected_k);

// Row-major stack of assembled feature vectors for a whole dataset.
class DesignMatrix {
 public:
  static DesignMatrix build(const Dataset& data, FeatureMode mode);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  FeatureMode mode() const noexcept { return mode_; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  FeatureMode mode_ = FeatureMode::full;
  std::vector<double> values_;
};

double sigmoid(double z) noexcept;

double belief(const ModelParams& p, std::span<const double> w);
std::vector<double> beliefs(const ModelParams& p, const DesignMatrix& design);
std::vector<double> beliefs(const ModelParams& p, const Dataset& data);

// Mean cross-entropy; beliefs are clamped to [1e-12, 1 - 1e-12] inside the log.
double loss(const ModelParams& p, const Dataset& data);
double loss(std::span<const double> beliefs, std::span<const int> labels);
std::vector<double> loss_grad(const ModelParams& p, const Dataset& data);

// sum_n coef[n] * row(n), accumulated in fixed-size blocks and reduced
// pairwise so the result does not depend on anything but the inputs.
std::vector<double> weighted_row_sum(const DesignMatrix& design, std::span<const double> coef);
double pairwise_sum(std::span<const double> values);

struct BaselineOptions {
  double step = 0.1;
  std::size_t max_iterations = 5000;
  double gradient_tolerance = 1e-6;
};

struct BaselineFit {
  ModelParams params;
  std::size_t iterations = 0;
  double gradient_norm = 0.0;
};

// Unregularized full-batch gradient descent from zero.
BaselineFit fit_baseline(const Dataset& data, FeatureMode mode, const BaselineOptions& options = {});

}  // namespace wfair
