#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "wfair/error.hpp"
#include "wfair/logistic_model.hpp"

using namespace wfair;

namespace {

Dataset one_row(std::vector<double> x, std::vector<int> a, int y) {
  Dataset d;
  d.n = 1;
  d.d = x.size();
  d.k = a.size();
  d.x = std::move(x);
  d.a = std::move(a);
  d.y = {y};
  d.group_of = {0};
  d.finalize();
  return d;
}

std::vector<double> numeric_grad(const ModelParams& p, const Dataset& data, double h = 1e-6) {
  std::vector<double> g(p.theta.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    auto up = p;
    auto down = p;
    up.theta[j] += h;
    down.theta[j] -= h;
    g[j] = (loss(up, data) - loss(down, data)) / (2 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("assemble_features") {
  const std::vector<double> x = {2.0};
  const std::vector<int> a = {1};
  CHECK(assemble_features(x, a, FeatureMode::full) == std::vector<double>{2, 1, 1});
  CHECK(assemble_features(x, a, FeatureMode::blind) == std::vector<double>{2, 1});
  CHECK(assemble_features({}, std::vector<int>{0}, FeatureMode::full) == std::vector<double>{0, 1});
  CHECK_THROWS_AS(assemble_features(x, a, FeatureMode::full, 2, 1), Error);
  CHECK(feature_dim(3, 2, FeatureMode::full) == 6);
  CHECK(feature_dim(3, 2, FeatureMode::blind) == 4);
}

TEST_CASE("ModelParams validation") {
  CHECK(ModelParams::zeros(3, 1, FeatureMode::full).theta.size() == 5);
  CHECK_NOTHROW(ModelParams::zeros(3, 1, FeatureMode::blind).validate(3, 1));
  CHECK_THROWS_AS((ModelParams{{0, 0, 0, 0}, FeatureMode::full}.validate(3, 1)), Error);
  CHECK_THROWS_AS((ModelParams{{0, 0, 0, std::nan("")}, FeatureMode::blind}.validate(3, 1)), Error);
}

TEST_CASE("belief") {
  const std::vector<double> w = {1.0};
  CHECK(belief(ModelParams{{0.0}, FeatureMode::blind}, w) == 0.5);
  CHECK(belief(ModelParams{{1.0}, FeatureMode::blind}, w) == doctest::Approx(0.7310585786300049));
  CHECK(belief(ModelParams{{1e6}, FeatureMode::blind}, w) == 1.0);
  CHECK(belief(ModelParams{{-1e6}, FeatureMode::blind}, w) == 0.0);
  CHECK(std::isfinite(sigmoid(-800.0)));
  CHECK_THROWS_AS(belief(ModelParams{{1.0, 2.0}, FeatureMode::blind}, w), Error);
  double prev = 0.0;
  for (int z = -40; z <= 40; ++z) {
    CHECK(sigmoid(z) >= prev);
    prev = sigmoid(z);
  }
}

TEST_CASE("loss values") {
  auto data = fixture::synthetic(40, 3, 2, 1);
  CHECK(loss(ModelParams::zeros(3, 1, FeatureMode::full), data) == doctest::Approx(std::log(2.0)));
  // x = [], blind: w = (1), theta . w = 1.
  const auto single = one_row({}, {0}, 1);
  CHECK(loss(ModelParams{{1.0}, FeatureMode::blind}, single) == doctest::Approx(0.31326168751822286));
  CHECK(std::isfinite(loss(ModelParams{{-1e6}, FeatureMode::blind}, single)));
  Dataset empty;
  CHECK_THROWS_AS(loss(ModelParams{{0.0}, FeatureMode::blind}, empty), Error);
}

TEST_CASE("loss decreases along scaling on separable data") {
  Dataset d;
  d.n = 4;
  d.d = 1;
  d.k = 1;
  d.x = {-2, -1, 1, 2};
  d.a = {0, 0, 0, 0};
  d.y = {0, 0, 1, 1};
  d.group_of = {0, 0, 0, 0};
  d.finalize();
  double prev = 1e9;
  for (double c = 0.5; c < 64; c *= 2) {
    const double l = loss(ModelParams{{c, 0.0}, FeatureMode::blind}, d);
    CHECK(l < prev);
    prev = l;
  }
  CHECK(prev < 1e-10);
}

TEST_CASE("loss_grad examples") {
  CHECK(loss_grad(ModelParams{{0.0}, FeatureMode::blind}, one_row({}, {0}, 1)) == std::vector<double>{-0.5});
  Dataset sym;
  sym.n = 2;
  sym.d = 2;
  sym.k = 1;
  sym.x = {0.3, -1.2, 0.3, -1.2};
  sym.a = {1, 1};
  sym.y = {1, 0};
  sym.group_of = {0, 0};
  sym.finalize();
  for (double g : loss_grad(ModelParams::zeros(2, 1, FeatureMode::full), sym)) CHECK(g == 0.0);
}

TEST_CASE("loss_grad matches finite differences") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> normal(0.0, 0.7);
  for (int t = 0; t < 30; ++t) {
    const auto data = fixture::synthetic(5 + t, 1 + t % 4, 2, 100 + t);
    for (auto mode : {FeatureMode::full, FeatureMode::blind}) {
      auto p = ModelParams::zeros(data.d, data.k, mode);
      for (auto& v : p.theta) v = normal(rng);
      const auto g = loss_grad(p, data);
      const auto fd = numeric_grad(p, data);
      for (std::size_t j = 0; j < g.size(); ++j) CHECK(g[j] == doctest::Approx(fd[j]).epsilon(1e-6).scale(1e-3));
    }
  }
}

TEST_CASE("loss is convex along random lines") {
  std::mt19937_64 rng(32);
  std::normal_distribution<double> normal(0.0, 2.0);
  const auto data = fixture::synthetic(60, 3, 3, 5);
  for (int t = 0; t < 100; ++t) {
    auto p = ModelParams::zeros(3, 1, FeatureMode::full);
    auto q = p;
    auto mid = p;
    for (std::size_t j = 0; j < p.theta.size(); ++j) {
      p.theta[j] = normal(rng);
      q.theta[j] = normal(rng);
      mid.theta[j] = 0.5 * (p.theta[j] + q.theta[j]);
    }
    CHECK(loss(mid, data) <= 0.5 * (loss(p, data) + loss(q, data)) + 1e-12);
  }
}

TEST_CASE("weighted_row_sum is deterministic and exact on small inputs") {
  const auto data = fixture::synthetic(1000, 4, 2, 9);
  const auto design = DesignMatrix::build(data, FeatureMode::full);
  std::vector<double> coef(data.n, 1.0);
  const auto a = weighted_row_sum(design, coef);
  const auto b = weighted_row_sum(design, coef);
  CHECK(a == b);
  double intercept = 0.0;
  for (std::size_t r = 0; r < data.n; ++r) intercept += design.row(r)[design.cols() - 1];
  CHECK(a.back() == intercept);
  std::vector<double> values(1000, 0.1);
  CHECK(pairwise_sum(values) == doctest::Approx(100.0).epsilon(1e-14));
}

TEST_CASE("baseline fit") {
  const auto data = fixture::synthetic(400, 3, 2, 3);
  const auto fit = fit_baseline(data, FeatureMode::full);
  CHECK(fit.params.theta.size() == 5);
  const auto g = loss_grad(fit.params, data);
  double norm = 0.0;
  for (double v : g) norm += v * v;
  CHECK(std::sqrt(norm) == doctest::Approx(fit.gradient_norm));
  CHECK(loss(fit.params, data) < std::log(2.0));
  CHECK(fit.iterations <= 5000);
  const auto again = fit_baseline(data, FeatureMode::full);
  CHECK(again.params.theta == fit.params.theta);
}
