#include "core/refine.hpp"

#include <cmath>

namespace sfuda {

RealVector soft_vote(const std::vector<RealVector>& neighbor_preds) {
  if (neighbor_preds.empty()) throw Error("empty neighbour list");
  const std::size_t c = neighbor_preds.front().size();
  RealVector mean(c, 0.0);
  for (const RealVector& p : neighbor_preds) {
    check_prob_vector(p);
    if (p.size() != c) throw Error("length mismatch");
    for (std::size_t i = 0; i < c; ++i) mean[i] += p[i];
  }
  for (double& x : mean) x /= static_cast<double>(neighbor_preds.size());
  return mean;
}

int refine_label(const RealVector& probs) {
  check_prob_vector(probs);
  int best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[best]) best = static_cast<int>(i);
  }
  return best;
}

double normalized_entropy(const RealVector& probs) {
  check_prob_vector(probs);
  if (probs.size() < 2) throw Error("need at least two classes");
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h / std::log2(static_cast<double>(probs.size()));
}

double uncertainty_weight(const RealVector& probs, WeightingMode mode, double hard_threshold) {
  const double h = normalized_entropy(probs);
  switch (mode) {
    case WeightingMode::kExponential:
      return std::exp(-h);
    case WeightingMode::kLinear:
      return 1.0 - h;
    case WeightingMode::kHard:
      return h <= hard_threshold ? 1.0 : 0.0;
  }
  throw Error("unknown weighting mode");
}

}  // namespace sfuda
