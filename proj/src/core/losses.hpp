#pragma once

#include <random>
#include <vector>

#include "core/memory.hpp"
#include "core/numerics.hpp"
#include "core/refine.hpp"

namespace sfuda {

enum class ClassificationMode { kNegative, kPositive, kPositiveNegative };

// Scalar plus gradients w.r.t. the per-sample logits that produced it.
struct BatchLoss {
  double value = 0.0;
  std::vector<RealVector> grad_logits;
};

// Scalar plus gradient w.r.t. the (unit-norm) query feature.
struct ContrastiveLoss {
  double value = 0.0;
  RealVector grad_query;
};

/// Reweighted classification loss on strongly-augmented logits. Negative mode
/// draws one complementary label per sample, uniform over the non-pseudo-label
/// classes; positive mode is weighted cross-entropy on the refined label.
BatchLoss classification_loss(const std::vector<RealVector>& logits_sa,
                              const std::vector<RefinedLabel>& refined,
                              ClassificationMode mode, std::mt19937_64& rng);

/// InfoNCE against the kept (mask = true) queue negatives. Keys are
/// momentum-model outputs and receive no gradient.
ContrastiveLoss contrastive_loss(const RealVector& q, const RealVector& k_pos,
                                 const TemporalQueue& queue, const std::vector<bool>& mask,
                                 double temperature);

/// Negative entropy of the batch-mean prediction (natural log).
BatchLoss diversity_loss(const std::vector<RealVector>& logits_batch);

/// Combined per-batch objective: grad_logits from the classification and
/// diversity terms, grad_queries from the contrastive term.
struct TargetStepLoss {
  double value = 0.0;
  double cls = 0.0;
  double ctr = 0.0;
  double div = 0.0;
  std::vector<RealVector> grad_logits;
  std::vector<RealVector> grad_queries;
};

TargetStepLoss total_loss(const BatchLoss& cls, const std::vector<ContrastiveLoss>& ctr,
                          const BatchLoss& div, double gamma1, double gamma2, double gamma3);

}  // namespace sfuda
