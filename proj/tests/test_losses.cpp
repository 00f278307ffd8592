#include <cmath>
#include <random>

#include "core/gradcheck.hpp"
#include "core/losses.hpp"
#include "doctest.h"

using namespace sfuda;

namespace {

RealVector logits_for(const RealVector& probs) {
  RealVector l(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) l[i] = std::log(std::max(probs[i], 1e-300));
  return l;
}

RealVector unit(std::initializer_list<double> v) { return l2_normalize(RealVector(v)); }

}  // namespace

TEST_CASE("classification loss, negative mode") {
  std::mt19937_64 rng(1);
  // C=2: the complementary label is forced to the non-pseudo-label class.
  std::vector<RefinedLabel> refined(1);
  refined[0].label = 0;
  refined[0].weight = 1.0;
  const BatchLoss loss = classification_loss({logits_for({0.3, 0.7})}, refined,
                                             ClassificationMode::kNegative, rng);
  CHECK(loss.value == doctest::Approx(-std::log(0.3)).epsilon(1e-9));

  refined[0].weight = 0.0;
  const BatchLoss zero = classification_loss({logits_for({0.3, 0.7})}, refined,
                                             ClassificationMode::kNegative, rng);
  CHECK(zero.value == 0.0);
  for (double g : zero.grad_logits[0]) CHECK(g == 0.0);

  // p at the complementary class == 0 contributes -ln(1) = 0.
  refined[0].weight = 1.0;
  const BatchLoss sat = classification_loss({logits_for({1.0, 0.0})}, refined,
                                            ClassificationMode::kNegative, rng);
  CHECK(sat.value == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("complementary label never equals the pseudo-label") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> classes(2, 6);
  for (int t = 0; t < 100000; ++t) {
    const int c = classes(rng);
    std::uniform_int_distribution<int> label(0, c - 1);
    const int y = label(rng);
    std::uniform_int_distribution<int> pick(0, c - 2);
    int comp = pick(rng);
    if (comp >= y) ++comp;
    CHECK(comp != y);
    CHECK(comp >= 0);
    CHECK(comp < c);
  }
}

TEST_CASE("classification loss is linear in the sample weight") {
  std::mt19937_64 rng(3);
  std::vector<RefinedLabel> refined(1);
  refined[0].label = 1;
  const RealVector logits = {0.4, -0.2, 1.1};
  for (double w : {0.25, 0.5, 1.0}) {
    refined[0].weight = w;
    std::mt19937_64 draws(99);
    const double vw =
        classification_loss({logits}, refined, ClassificationMode::kNegative, draws).value;
    refined[0].weight = 1.0;
    std::mt19937_64 draws2(99);
    const double v1 =
        classification_loss({logits}, refined, ClassificationMode::kNegative, draws2).value;
    CHECK(vw == doctest::Approx(w * v1).epsilon(1e-12));
  }
}

TEST_CASE("contrastive loss examples and masking contract") {
  TemporalQueue queue(8);
  queue.push({unit({0.0, 1.0, 0.0}), unit({0.0, 0.0, 1.0})}, {{0}, {1}});
  const RealVector q = unit({1.0, 0.0, 0.0});

  // All negatives masked: only the positive term remains.
  const ContrastiveLoss all_masked =
      contrastive_loss(q, q, queue, {false, false}, 1.0);
  CHECK(all_masked.value == 0.0);
  for (double g : all_masked.grad_query) CHECK(g == 0.0);

  // Orthogonal negatives at tau = 1: loss = ln(1 + 2/e).
  const ContrastiveLoss kept = contrastive_loss(q, q, queue, {true, true}, 1.0);
  CHECK(kept.value == doctest::Approx(std::log(1.0 + 2.0 / std::exp(1.0))).epsilon(1e-12));

  // Adding a masked negative is bit-identical.
  TemporalQueue bigger(8);
  bigger.push({unit({0.0, 1.0, 0.0}), unit({0.0, 0.0, 1.0}), unit({1.0, 1.0, 0.0})},
              {{0}, {1}, {2}});
  const ContrastiveLoss with_masked =
      contrastive_loss(q, q, bigger, {true, true, false}, 1.0);
  CHECK(with_masked.value == kept.value);
  CHECK(with_masked.grad_query == kept.grad_query);

  CHECK_THROWS_AS(contrastive_loss(q, q, queue, {true, true}, 0.0), Error);
  CHECK_THROWS_AS(contrastive_loss({2.0, 0.0, 0.0}, q, queue, {true, true}, 1.0), Error);
}

TEST_CASE("contrastive loss is monotone in similarities") {
  const RealVector q = unit({1.0, 0.2, -0.1});
  const RealVector k_pos = unit({0.9, 0.3, 0.0});
  TemporalQueue queue(8);
  queue.push({unit({0.1, 1.0, 0.2})}, {{0}});
  const std::vector<bool> mask = {true};
  const double base = contrastive_loss(q, k_pos, queue, mask, 0.2).value;

  // More-aligned positive lowers the loss.
  const double better_pos = contrastive_loss(q, q, queue, mask, 0.2).value;
  CHECK(better_pos < base);

  // More-aligned negative raises the loss.
  TemporalQueue harder(8);
  harder.push({unit({1.0, 0.25, -0.05})}, {{0}});
  CHECK(contrastive_loss(q, k_pos, harder, mask, 0.2).value > base);
}

TEST_CASE("diversity loss") {
  // Mean uniform: the minimum -ln 2.
  const BatchLoss uniform = diversity_loss({logits_for({0.9, 0.1}), logits_for({0.1, 0.9})});
  CHECK(uniform.value == doctest::Approx(-std::log(2.0)).epsilon(1e-12));

  // Identical one-hot predictions: the maximum, 0.
  const BatchLoss collapsed = diversity_loss({logits_for({1.0, 0.0}), logits_for({1.0, 0.0})});
  CHECK(collapsed.value == doctest::Approx(0.0).epsilon(1e-9));

  // Permutation invariance.
  const std::vector<RealVector> batch = {logits_for({0.7, 0.3}), logits_for({0.2, 0.8}),
                                         logits_for({0.55, 0.45})};
  const std::vector<RealVector> perm = {batch[2], batch[0], batch[1]};
  CHECK(diversity_loss(batch).value == doctest::Approx(diversity_loss(perm).value).epsilon(1e-15));
}

TEST_CASE("diversity loss is bounded below by -ln C") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_int_distribution<int> classes(2, 6);
  std::uniform_int_distribution<int> batch_size(1, 6);
  for (int t = 0; t < 100; ++t) {
    const int c = classes(rng);
    std::vector<RealVector> batch(batch_size(rng), RealVector(c));
    for (RealVector& l : batch)
      for (double& x : l) x = u(rng);
    CHECK(diversity_loss(batch).value >= -std::log(static_cast<double>(c)) - 1e-12);
  }
}

TEST_CASE("total loss combination") {
  std::mt19937_64 rng(13);
  std::vector<RefinedLabel> refined(2);
  refined[0] = {0, {}, 1.0};
  refined[1] = {1, {}, 0.5};
  const std::vector<RealVector> logits = {{0.2, -0.3}, {1.0, 0.4}};
  const BatchLoss cls = classification_loss(logits, refined, ClassificationMode::kNegative, rng);
  const BatchLoss div = diversity_loss(logits);

  const TargetStepLoss plain = total_loss(cls, {}, div, 1.0, 1.0, 1.0);
  CHECK(plain.value == doctest::Approx(cls.value + div.value).epsilon(1e-15));

  const TargetStepLoss only_cls = total_loss(cls, {}, div, 2.0, 0.0, 0.0);
  CHECK(only_cls.value == doctest::Approx(2.0 * cls.value).epsilon(1e-15));
  for (std::size_t i = 0; i < logits.size(); ++i)
    for (std::size_t j = 0; j < 2; ++j)
      CHECK(only_cls.grad_logits[i][j] ==
            doctest::Approx(2.0 * cls.grad_logits[i][j]).epsilon(1e-15));
}

TEST_CASE("all loss gradients pass finite differences") {
  for (const GradCheckResult& r : run_gradient_checks(100)) {
    INFO(r.name);
    CHECK(r.passed);
    CHECK(r.max_relative_error < 1e-4);
  }
}

TEST_CASE("corrupted gradients are caught") {
  bool any_failed = false;
  for (const GradCheckResult& r : run_gradient_checks(3, 1e-4, true))
    any_failed = any_failed || !r.passed;
  CHECK(any_failed);
}
