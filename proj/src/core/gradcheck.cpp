#include "core/gradcheck.hpp"

#include <cmath>
#include <random>

#include "core/losses.hpp"
#include "core/model.hpp"
#include "core/rng.hpp"

namespace sfuda {

namespace {

constexpr double kStep = 1e-5;

RealVector random_logits(int c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  RealVector v(c);
  for (double& x : v) x = dist(rng);
  return v;
}

RealVector random_unit(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  RealVector v(dim);
  double n = 0.0;
  do {
    for (double& x : v) x = dist(rng);
    n = norm(v);
  } while (n < 1e-6);
  return l2_normalize(v);
}

std::vector<RefinedLabel> random_refined(int batch, int c, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> label(0, c - 1);
  std::uniform_real_distribution<double> weight(std::exp(-1.0), 1.0);
  std::vector<RefinedLabel> out(batch);
  for (RefinedLabel& r : out) {
    r.label = label(rng);
    r.weight = weight(rng);
  }
  return out;
}

// Flattens per-sample logits gradients into one vector for comparison.
RealVector flatten(const std::vector<RealVector>& grads) {
  RealVector flat;
  for (const RealVector& g : grads) flat.insert(flat.end(), g.begin(), g.end());
  return flat;
}

std::vector<RealVector> unflatten(const RealVector& flat, int batch, int c) {
  std::vector<RealVector> out(batch, RealVector(c));
  for (int i = 0; i < batch; ++i)
    std::copy(flat.begin() + i * c, flat.begin() + (i + 1) * c, out[i].begin());
  return out;
}

double check_classification(ClassificationMode mode, int trials, std::uint64_t base_seed,
                            bool corrupt) {
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 rng(splitmix64(base_seed + t));
    std::uniform_int_distribution<int> classes(2, 6);
    std::uniform_int_distribution<int> batch_size(1, 4);
    const int c = classes(rng);
    const int b = batch_size(rng);
    const auto refined = random_refined(b, c, rng);
    std::vector<RealVector> logits(b);
    for (RealVector& l : logits) l = random_logits(c, rng);

    const std::uint64_t draw_seed = rng();
    auto eval = [&](const RealVector& flat) {
      std::mt19937_64 draws(draw_seed);  // identical complementary draws per call
      return classification_loss(unflatten(flat, b, c), refined, mode, draws).value;
    };
    std::mt19937_64 draws(draw_seed);
    BatchLoss loss = classification_loss(logits, refined, mode, draws);
    RealVector analytic = flatten(loss.grad_logits);
    if (corrupt && !analytic.empty()) analytic[0] += 0.5;
    const RealVector numeric = finite_diff_grad(eval, flatten(logits), kStep);
    worst = std::max(worst, compare_gradients(analytic, numeric).max_relative_error);
  }
  return worst;
}

double check_contrastive(int trials, std::uint64_t base_seed, bool corrupt) {
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 rng(splitmix64(base_seed + t));
    std::uniform_int_distribution<int> dims(3, 8);
    std::uniform_int_distribution<int> queue_len(0, 10);
    std::uniform_real_distribution<double> coord(-1.5, 1.5);
    std::bernoulli_distribution keep(0.6);
    const int dim = dims(rng);
    const int nq = queue_len(rng);

    TemporalQueue queue(64);
    std::vector<RealVector> keys;
    std::vector<std::vector<int>> snapshots;
    for (int i = 0; i < nq; ++i) {
      keys.push_back(random_unit(dim, rng));
      snapshots.push_back({0});
    }
    if (nq > 0) queue.push(keys, snapshots);
    std::vector<bool> mask;
    for (int i = 0; i < nq; ++i) mask.push_back(keep(rng));
    const RealVector k_pos = random_unit(dim, rng);
    RealVector v(dim);
    for (double& x : v) x = coord(rng);
    if (norm(v) < 1e-3) v[0] += 1.0;
    const double tau = 0.07;

    // Check through the normalization so the unit-norm contract holds at
    // every perturbed point.
    auto eval = [&](const RealVector& raw) {
      return contrastive_loss(l2_normalize(raw), k_pos, queue, mask, tau).value;
    };
    const ContrastiveLoss loss = contrastive_loss(l2_normalize(v), k_pos, queue, mask, tau);
    RealVector analytic = l2_normalize_backward(v, loss.grad_query);
    if (corrupt) analytic[0] += 0.5;
    const RealVector numeric = finite_diff_grad(eval, v, kStep);
    worst = std::max(worst, compare_gradients(analytic, numeric).max_relative_error);
  }
  return worst;
}

double check_diversity(int trials, std::uint64_t base_seed, bool corrupt) {
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 rng(splitmix64(base_seed + t));
    std::uniform_int_distribution<int> classes(2, 6);
    std::uniform_int_distribution<int> batch_size(1, 5);
    const int c = classes(rng);
    const int b = batch_size(rng);
    std::vector<RealVector> logits(b);
    for (RealVector& l : logits) l = random_logits(c, rng);

    auto eval = [&](const RealVector& flat) {
      return diversity_loss(unflatten(flat, b, c)).value;
    };
    RealVector analytic = flatten(diversity_loss(logits).grad_logits);
    if (corrupt) analytic[0] += 0.5;
    const RealVector numeric = finite_diff_grad(eval, flatten(logits), kStep);
    worst = std::max(worst, compare_gradients(analytic, numeric).max_relative_error);
  }
  return worst;
}

// Backprop through the whole model: total loss as a function of the flat
// parameter vector, on a small fixed architecture.
double check_model_backprop(int trials, std::uint64_t base_seed, bool corrupt) {
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 rng(splitmix64(base_seed + t));
    ModelConfig mc;
    mc.input_dim = 2;
    mc.hidden = {4};
    mc.bottleneck_dim = 3;
    mc.num_classes = 3;
    ModelParams params = init_model(mc, rng);

    std::uniform_real_distribution<double> coord(-2.0, 2.0);
    std::vector<RealVector> inputs(2, RealVector(2));
    for (RealVector& x : inputs)
      for (double& v : x) v = coord(rng);
    const auto refined = random_refined(2, 3, rng);

    TemporalQueue queue(8);
    queue.push({random_unit(3, rng), random_unit(3, rng)}, {{0}, {1}});
    const std::vector<bool> mask = {true, true};
    const RealVector k_pos = random_unit(3, rng);
    const std::uint64_t draw_seed = rng();

    auto eval_with = [&](const ModelParams& p) {
      std::vector<RealVector> logits;
      std::vector<ContrastiveLoss> ctr;
      for (const RealVector& x : inputs) {
        const ForwardCache cache = forward(p, x);
        logits.push_back(cache.logits);
        ctr.push_back(
            contrastive_loss(l2_normalize(cache.z), k_pos, queue, mask, 0.1));
      }
      std::mt19937_64 draws(draw_seed);
      const BatchLoss cls =
          classification_loss(logits, refined, ClassificationMode::kNegative, draws);
      const BatchLoss div = diversity_loss(logits);
      return total_loss(cls, ctr, div, 1.0, 1.0, 1.0);
    };

    auto eval = [&](const RealVector& flat) {
      ModelParams p = params;
      unflatten_params(p, flat);
      return eval_with(p).value;
    };

    const TargetStepLoss total = eval_with(params);
    ParamGrads grads = zero_grads(params);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      const ForwardCache cache = forward(params, inputs[i]);
      const RealVector dz = l2_normalize_backward(cache.z, total.grad_queries[i]);
      accumulate_backward(params, cache, total.grad_logits[i], dz, grads);
    }
    RealVector analytic = flatten_grads(grads);
    if (corrupt) analytic[0] += 0.5;
    const RealVector numeric = finite_diff_grad(eval, flatten_params(params), kStep);
    worst = std::max(worst, compare_gradients(analytic, numeric).max_relative_error);
  }
  return worst;
}

}  // namespace

std::vector<GradCheckResult> run_gradient_checks(int trials, double tolerance, bool corrupt) {
  if (trials < 1) throw Error("trials must be positive");
  std::vector<GradCheckResult> results;
  auto record = [&](const std::string& name, double err) {
    results.push_back({name, err, trials, err < tolerance});
  };
  record("classification_negative",
         check_classification(ClassificationMode::kNegative, trials, 101, corrupt));
  record("classification_positive",
         check_classification(ClassificationMode::kPositive, trials, 202, corrupt));
  record("classification_positive_negative",
         check_classification(ClassificationMode::kPositiveNegative, trials, 303, corrupt));
  record("contrastive", check_contrastive(trials, 404, corrupt));
  record("diversity", check_diversity(trials, 505, corrupt));
  record("model_backprop", check_model_backprop(std::min(trials, 20), 606, corrupt));
  return results;
}

}  // namespace sfuda
