#pragma once

#include "core/numerics.hpp"

namespace sfuda {

enum class WeightingMode { kExponential, kLinear, kHard };

struct RefinedLabel {
  int label = 0;                // argmax of averaged_scores
  RealVector averaged_scores;   // neighbour soft vote
  double weight = 1.0;          // uncertainty weight in (0, 1]
};

/// Coordinate-wise mean of neighbour predictions.
RealVector soft_vote(const std::vector<RealVector>& neighbor_preds);

/// Argmax with lowest-index tie-break.
int refine_label(const RealVector& probs);

/// Shannon entropy in bits divided by log2(C); in [0, 1].
double normalized_entropy(const RealVector& probs);

double uncertainty_weight(const RealVector& probs, WeightingMode mode,
                          double hard_threshold = 0.75);

}  // namespace sfuda
