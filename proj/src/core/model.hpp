#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "core/numerics.hpp"

namespace sfuda {

struct ModelConfig {
  int input_dim = 2;
  std::vector<int> hidden = {32, 32};
  int bottleneck_dim = 16;  // P
  int num_classes = 2;      // C
};

struct Layer {
  // weight[out][in]
  std::vector<RealVector> weight;
  RealVector bias;
};

// MLP encoder (tanh hidden layers, linear bottleneck) + linear classifier.
struct ModelParams {
  ModelConfig config;
  std::vector<Layer> encoder;  // hidden layers then bottleneck
  Layer classifier;
};

struct ForwardCache {
  RealVector input;
  std::vector<RealVector> activations;  // post-activation per encoder layer
  RealVector z;       // bottleneck output (== activations.back())
  RealVector logits;
  RealVector probs;
};

// Same Layer structure reused for gradients and momentum buffers.
struct ParamGrads {
  std::vector<Layer> encoder;
  Layer classifier;
};

ModelParams init_model(const ModelConfig& config, std::mt19937_64& rng);

ForwardCache forward(const ModelParams& params, const RealVector& x);

std::vector<std::pair<RealVector, RealVector>> predict_batch(
    const ModelParams& params, const std::vector<RealVector>& xs);

ParamGrads zero_grads(const ModelParams& params);

/// Accumulates parameter gradients for one sample given upstream gradients
/// w.r.t. the logits and (optionally, may be empty) the bottleneck output z.
void accumulate_backward(const ModelParams& params, const ForwardCache& cache,
                         const RealVector& dlogits, const RealVector& dz,
                         ParamGrads& out);

/// theta' <- m * theta' + (1 - m) * theta, element-wise.
void ema_update(ModelParams& momentum_params, const ModelParams& online_params, double m);

std::size_t parameter_count(const ModelParams& params);
RealVector flatten_params(const ModelParams& params);
void unflatten_params(ModelParams& params, const RealVector& flat);
RealVector flatten_grads(const ParamGrads& grads);

/// One SGD-with-momentum step over all parameters.
void apply_sgd(ModelParams& params, const ParamGrads& grads, double learning_rate,
               ParamGrads& momentum_buffers, double momentum);

void save_model(const ModelParams& params, std::uint64_t seed, const std::string& path);
ModelParams load_model(const std::string& path, std::uint64_t* seed_out = nullptr);

}  // namespace sfuda
