#include <algorithm>
#include <cmath>
#include <random>

#include "core/refine.hpp"
#include "doctest.h"

using namespace sfuda;

TEST_CASE("soft_vote") {
  const RealVector two = soft_vote({{1.0, 0.0}, {0.0, 1.0}});
  CHECK(two == RealVector{0.5, 0.5});

  CHECK(soft_vote({{0.3, 0.7}}) == RealVector{0.3, 0.7});

  const RealVector three = soft_vote({{0.9, 0.1}, {0.8, 0.2}, {0.1, 0.9}});
  CHECK(three[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(three[1] == doctest::Approx(0.4).epsilon(1e-12));

  CHECK_THROWS_AS(soft_vote({}), Error);
}

TEST_CASE("soft_vote then refine_label is order-invariant") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<RealVector> preds;
    for (int i = 0; i < 6; ++i) {
      RealVector p(4);
      double sum = 0.0;
      for (double& x : p) {
        x = u(rng) + 1e-6;
        sum += x;
      }
      for (double& x : p) x /= sum;
      preds.push_back(p);
    }
    const int before = refine_label(soft_vote(preds));
    std::shuffle(preds.begin(), preds.end(), rng);
    CHECK(refine_label(soft_vote(preds)) == before);
  }
}

TEST_CASE("refine_label argmax and tie-break") {
  CHECK(refine_label({0.6, 0.4}) == 0);
  CHECK(refine_label({0.5, 0.5}) == 0);
  CHECK(refine_label({0.0, 0.0, 0.0, 1.0}) == 3);
}

TEST_CASE("normalized entropy and weighting modes") {
  const RealVector onehot = {1.0, 0.0, 0.0, 0.0};
  CHECK(normalized_entropy(onehot) == 0.0);
  CHECK(uncertainty_weight(onehot, WeightingMode::kExponential) == 1.0);
  CHECK(uncertainty_weight(onehot, WeightingMode::kLinear) == 1.0);
  CHECK(uncertainty_weight(onehot, WeightingMode::kHard) == 1.0);

  const RealVector uniform = {0.25, 0.25, 0.25, 0.25};
  CHECK(normalized_entropy(uniform) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(uncertainty_weight(uniform, WeightingMode::kExponential) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

  const RealVector half = {0.5, 0.5, 0.0, 0.0};
  CHECK(normalized_entropy(half) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(uncertainty_weight(half, WeightingMode::kExponential) ==
        doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  CHECK(uncertainty_weight(half, WeightingMode::kLinear) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(uncertainty_weight(half, WeightingMode::kHard, 0.75) == 1.0);
  CHECK(uncertainty_weight(half, WeightingMode::kHard, 0.25) == 0.0);

  CHECK_THROWS_AS(uncertainty_weight({0.5, 0.6}, WeightingMode::kExponential), Error);
}

TEST_CASE("entropy is permutation-invariant and in [0, 1]") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> len(2, 8);
  for (int t = 0; t < 500; ++t) {
    RealVector p(len(rng));
    double sum = 0.0;
    for (double& x : p) {
      x = u(rng) + 1e-9;
      sum += x;
    }
    for (double& x : p) x /= sum;
    const double h = normalized_entropy(p);
    CHECK(h >= 0.0);
    CHECK(h <= 1.0 + 1e-12);
    std::shuffle(p.begin(), p.end(), rng);
    CHECK(normalized_entropy(p) == doctest::Approx(h).epsilon(1e-9));
  }
}

TEST_CASE("exponential weight is strictly decreasing in entropy with range [1/e, 1]") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::pair<double, double>> points;  // (entropy, weight)
  for (int t = 0; t < 1000; ++t) {
    RealVector p(4);
    double sum = 0.0;
    for (double& x : p) {
      x = u(rng) + 1e-9;
      sum += x;
    }
    for (double& x : p) x /= sum;
    const double h = normalized_entropy(p);
    const double w = uncertainty_weight(p, WeightingMode::kExponential);
    CHECK(w >= std::exp(-1.0) - 1e-12);
    CHECK(w <= 1.0);
    points.emplace_back(h, w);
  }
  std::sort(points.begin(), points.end());
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].first > points[i - 1].first + 1e-12)
      CHECK(points[i].second < points[i - 1].second);
  }
}
