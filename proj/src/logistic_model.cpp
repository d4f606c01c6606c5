#include "wfair/logistic_model.hpp"

#include <algorithm>
#include <cmath>

#include "wfair/error.hpp"

namespace wfair {

namespace {

constexpr std::size_t kBlockRows = 256;
constexpr double kLogClamp = 1e-12;

double dot(std::span<const double> u, std::span<const double> v) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

void check_params(const ModelParams& p, const DesignMatrix& design) {
  require(p.mode == design.mode(), "model mode does not match design matrix");
  require(p.theta.size() == design.cols(), "model parameters do not match feature dimension");
}

}  // namespace

std::size_t feature_dim(std::size_t d, std::size_t k, FeatureMode mode) {
  return mode == FeatureMode::full ? d + k + 1 : d + 1;
}

ModelParams ModelParams::zeros(std::size_t d, std::size_t k, FeatureMode mode) {
  return ModelParams{std::vector<double>(feature_dim(d, k, mode), 0.0), mode};
}

void ModelParams::validate(std::size_t d, std::size_t k) const {
  require(theta.size() == feature_dim(d, k, mode), "model parameters do not match feature dimension");
  for (double v : theta) require(std::isfinite(v), "non-finite model parameter");
}

std::vector<double> assemble_features(std::span<const double> x, std::span<const int> a, FeatureMode mode) {
  std::vector<double> w;
  w.reserve(x.size() + a.size() + 1);
  w.insert(w.end(), x.begin(), x.end());
  if (mode == FeatureMode::full) {
    for (int v : a) w.push_back(static_cast<double>(v));
  }
  w.push_back(1.0);
  return w;
}

std::vector<double> assemble_features(std::span<const double> x, std::span<const int> a, FeatureMode mode,
                                      std::size_t expected_d, std::size_t expected_k) {
  require(x.size() == expected_d && a.size() == expected_k, "feature dimension mismatch");
  return assemble_features(x, a, mode);
}

DesignMatrix DesignMatrix::build(const Dataset& data, FeatureMode mode) {
  DesignMatrix m;
  m.rows_ = data.n;
  m.cols_ = feature_dim(data.d, data.k, mode);
  m.mode_ = mode;
  m.values_.reserve(m.rows_ * m.cols_);
  for (std::size_t r = 0; r < data.n; ++r) {
    const auto w = assemble_features(data.features(r), data.attributes(r), mode);
    m.values_.insert(m.values_.end(), w.begin(), w.end());
  }
  return m;
}

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double belief(const ModelParams& p, std::span<const double> w) {
  require(p.theta.size() == w.size(), "feature dimension mismatch");
  return sigmoid(dot(p.theta, w));
}

std::vector<double> beliefs(const ModelParams& p, const DesignMatrix& design) {
  check_params(p, design);
  std::vector<double> s(design.rows());
  for (std::size_t r = 0; r < design.rows(); ++r) s[r] = sigmoid(dot(p.theta, design.row(r)));
  return s;
}

std::vector<double> beliefs(const ModelParams& p, const Dataset& data) {
  return beliefs(p, DesignMatrix::build(data, p.mode));
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= kBlockRows) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double loss(std::span<const double> s, std::span<const int> y) {
  require(!s.empty(), "loss of an empty dataset");
  require(s.size() == y.size(), "beliefs and labels differ in length");
  std::vector<double> terms(s.size());
  for (std::size_t n = 0; n < s.size(); ++n) {
    const double p = std::clamp(s[n], kLogClamp, 1.0 - kLogClamp);
    terms[n] = y[n] == 1 ? -std::log(p) : -std::log(1.0 - p);
  }
  return pairwise_sum(terms) / static_cast<double>(s.size());
}

double loss(const ModelParams& p, const Dataset& data) {
  require(data.n > 0, "loss of an empty dataset");
  return loss(beliefs(p, data), data.y);
}

std::vector<double> weighted_row_sum(const DesignMatrix& design, std::span<const double> coef) {
  require(coef.size() == design.rows(), "row weights do not match design matrix");
  const std::size_t cols = design.cols();
  const std::size_t blocks = (design.rows() + kBlockRows - 1) / kBlockRows;
  std::vector<std::vector<double>> partial(std::max<std::size_t>(blocks, 1), std::vector<double>(cols, 0.0));
  for (std::size_t b = 0; b < blocks; ++b) {
    auto& acc = partial[b];
    const std::size_t end = std::min(design.rows(), (b + 1) * kBlockRows);
    for (std::size_t r = b * kBlockRows; r < end; ++r) {
      const double c = coef[r];
      if (c == 0.0) continue;
      const auto w = design.row(r);
      for (std::size_t j = 0; j < cols; ++j) acc[j] += c * w[j];
    }
  }
  // Tree reduction over block partials.
  for (std::size_t stride = 1; stride < partial.size(); stride *= 2) {
    for (std::size_t b = 0; b + stride < partial.size(); b += 2 * stride) {
      for (std::size_t j = 0; j < cols; ++j) partial[b][j] += partial[b + stride][j];
    }
  }
  return std::move(partial.front());
}

std::vector<double> loss_grad(const ModelParams& p, const Dataset& data) {
  require(data.n > 0, "gradient of an empty dataset");
  const auto design = DesignMatrix::build(data, p.mode);
  const auto s = beliefs(p, design);
  std::vector<double> coef(data.n);
  const double inv_n = 1.0 / static_cast<double>(data.n);
  for (std::size_t n = 0; n < data.n; ++n) coef[n] = (s[n] - data.y[n]) * inv_n;
  return weighted_row_sum(design, coef);
}

BaselineFit fit_baseline(const Dataset& data, FeatureMode mode, const BaselineOptions& options) {
  require(data.n > 0, "cannot fit an empty dataset");
  const auto design = DesignMatrix::build(data, mode);
  BaselineFit fit{ModelParams::zeros(data.d, data.k, mode), 0, 0.0};
  std::vector<double> coef(data.n);
  const double inv_n = 1.0 / static_cast<double>(data.n);
  for (std::size_t it = 0; it <= options.max_iterations; ++it) {
    const auto s = beliefs(fit.params, design);
    for (std::size_t n = 0; n < data.n; ++n) coef[n] = (s[n] - data.y[n]) * inv_n;
    const auto g = weighted_row_sum(design, coef);
    fit.gradient_norm = std::sqrt(dot(g, g));
    fit.iterations = it;
    if (fit.gradient_norm < options.gradient_tolerance || it == options.max_iterations) break;
    for (std::size_t j = 0; j < g.size(); ++j) fit.params.theta[j] -= options.step * g[j];
  }
  return fit;
}

}  // namespace wfair
