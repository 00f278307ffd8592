#include "core/losses.hpp"

#include <algorithm>
#include <cmath>

namespace sfuda {

namespace {
constexpr double kLogFloor = 1e-12;
}

BatchLoss classification_loss(const std::vector<RealVector>& logits_sa,
                              const std::vector<RefinedLabel>& refined,
                              ClassificationMode mode, std::mt19937_64& rng) {
  if (logits_sa.empty()) throw Error("empty batch");
  if (logits_sa.size() != refined.size()) throw Error("batch size mismatch");
  const int c = static_cast<int>(logits_sa.front().size());
  const bool uses_negative =
      mode == ClassificationMode::kNegative || mode == ClassificationMode::kPositiveNegative;
  if (uses_negative && c < 2) throw Error("no complementary label exists");

  BatchLoss loss;
  const double inv_b = 1.0 / static_cast<double>(logits_sa.size());
  for (std::size_t i = 0; i < logits_sa.size(); ++i) {
    const RealVector& logits = logits_sa[i];
    const RefinedLabel& r = refined[i];
    if (!(r.weight >= 0.0 && r.weight <= 1.0)) throw Error("weight out of [0, 1]");
    if (r.label < 0 || r.label >= c) throw Error("label out of range");
    const RealVector p = softmax(logits);
    RealVector grad(c, 0.0);
    double value = 0.0;

    if (uses_negative) {
      std::uniform_int_distribution<int> pick(0, c - 2);
      int comp = pick(rng);
      if (comp >= r.label) ++comp;
      const double one_minus = std::max(1.0 - p[comp], kLogFloor);
      value += -r.weight * std::log(one_minus);
      // d/dlogit_j of -w ln(1 - p_t) = w p_t (delta_tj - p_j) / (1 - p_t)
      const double scale = r.weight * p[comp] / one_minus;
      for (int j = 0; j < c; ++j) grad[j] += scale * ((j == comp ? 1.0 : 0.0) - p[j]);
    }
    if (mode == ClassificationMode::kPositive || mode == ClassificationMode::kPositiveNegative) {
      value += -r.weight * std::log(std::max(p[r.label], kLogFloor));
      for (int j = 0; j < c; ++j)
        grad[j] += r.weight * (p[j] - (j == r.label ? 1.0 : 0.0));
    }

    loss.value += inv_b * value;
    for (double& g : grad) g *= inv_b;
    loss.grad_logits.push_back(std::move(grad));
  }
  return loss;
}

ContrastiveLoss contrastive_loss(const RealVector& q, const RealVector& k_pos,
                                 const TemporalQueue& queue, const std::vector<bool>& mask,
                                 double temperature) {
  if (!(temperature > 0.0)) throw Error("temperature must be positive");
  if (std::abs(norm(q) - 1.0) > 1e-6 || std::abs(norm(k_pos) - 1.0) > 1e-6)
    throw Error("contrastive inputs must be unit norm");
  if (mask.size() != queue.size()) throw Error("mask length mismatch");

  const double s_pos = dot(q, k_pos) / temperature;
  std::vector<const RealVector*> kept;
  std::vector<double> sims;
  sims.push_back(s_pos);
  std::size_t j = 0;
  for (const QueueEntry& entry : queue.entries()) {
    if (mask[j++]) {
      kept.push_back(&entry.key);
      sims.push_back(dot(q, entry.key) / temperature);
    }
  }

  // log-sum-exp over {positive, kept negatives}; loss = lse - s_pos.
  const double m = *std::max_element(sims.begin(), sims.end());
  double sum = 0.0;
  for (double s : sims) sum += std::exp(s - m);
  const double lse = m + std::log(sum);

  ContrastiveLoss loss;
  loss.value = lse - s_pos;
  loss.grad_query.assign(q.size(), 0.0);
  const double sigma_pos = std::exp(sims[0] - m) / sum;
  for (std::size_t i = 0; i < q.size(); ++i)
    loss.grad_query[i] = (sigma_pos - 1.0) * k_pos[i] / temperature;
  for (std::size_t n = 0; n < kept.size(); ++n) {
    const double sigma = std::exp(sims[n + 1] - m) / sum;
    for (std::size_t i = 0; i < q.size(); ++i)
      loss.grad_query[i] += sigma * (*kept[n])[i] / temperature;
  }
  return loss;
}

BatchLoss diversity_loss(const std::vector<RealVector>& logits_batch) {
  if (logits_batch.empty()) throw Error("empty batch");
  const std::size_t c = logits_batch.front().size();
  const double inv_b = 1.0 / static_cast<double>(logits_batch.size());

  std::vector<RealVector> probs;
  probs.reserve(logits_batch.size());
  RealVector mean(c, 0.0);
  for (const RealVector& logits : logits_batch) {
    probs.push_back(softmax(logits));
    for (std::size_t j = 0; j < c; ++j) mean[j] += inv_b * probs.back()[j];
  }

  BatchLoss loss;
  RealVector dmean(c, 0.0);  // d(sum p̄ ln p̄)/dp̄
  for (std::size_t j = 0; j < c; ++j) {
    if (mean[j] > 0.0) {
      loss.value += mean[j] * std::log(mean[j]);
      dmean[j] = std::log(mean[j]) + 1.0;
    }
  }
  for (const RealVector& p : probs) {
    RealVector grad(c, 0.0);
    double pd = 0.0;
    for (std::size_t j = 0; j < c; ++j) pd += p[j] * dmean[j];
    for (std::size_t j = 0; j < c; ++j) grad[j] = inv_b * p[j] * (dmean[j] - pd);
    loss.grad_logits.push_back(std::move(grad));
  }
  return loss;
}

TargetStepLoss total_loss(const BatchLoss& cls, const std::vector<ContrastiveLoss>& ctr,
                          const BatchLoss& div, double gamma1, double gamma2, double gamma3) {
  TargetStepLoss total;
  total.cls = cls.value;
  total.div = div.value;
  if (!ctr.empty()) {
    const double inv_b = 1.0 / static_cast<double>(ctr.size());
    for (const ContrastiveLoss& c : ctr) total.ctr += inv_b * c.value;
  }
  total.value = gamma1 * total.cls + gamma2 * total.ctr + gamma3 * total.div;
  if (!std::isfinite(total.value)) throw Error("non-finite loss");

  const std::size_t b = std::max(cls.grad_logits.size(), div.grad_logits.size());
  for (std::size_t i = 0; i < b; ++i) {
    RealVector g;
    if (i < cls.grad_logits.size()) {
      g = cls.grad_logits[i];
      for (double& x : g) x *= gamma1;
    }
    if (i < div.grad_logits.size()) {
      if (g.empty()) g.assign(div.grad_logits[i].size(), 0.0);
      for (std::size_t j = 0; j < g.size(); ++j) g[j] += gamma3 * div.grad_logits[i][j];
    }
    total.grad_logits.push_back(std::move(g));
  }
  if (!ctr.empty()) {
    const double scale = gamma2 / static_cast<double>(ctr.size());
    for (const ContrastiveLoss& c : ctr) {
      RealVector g = c.grad_query;
      for (double& x : g) x *= scale;
      total.grad_queries.push_back(std::move(g));
    }
  }
  return total;
}

}  // namespace sfuda
