#pragma once

#include <cstdint>
#include <string>

#include "core/data.hpp"
#include "core/losses.hpp"
#include "core/model.hpp"
#include "core/refine.hpp"

namespace sfuda {

struct AdaptationConfig {
  DataConfig data;
  ModelConfig model;

  int k_neighbors = 10;          // K
  int history_len = 5;           // T
  int queue_capacity = 256;      // N
  double ema_momentum = 0.99;    // m
  double temperature = 0.07;     // tau
  double gamma_cls = 1.0;
  double gamma_ctr = 1.0;
  double gamma_div = 1.0;
  WeightingMode weighting_mode = WeightingMode::kExponential;
  double hard_threshold = 0.75;
  ClassificationMode classification_mode = ClassificationMode::kNegative;
  ExclusionRule exclusion_rule = ExclusionRule::kAlignedEpochs;

  bool refinement = true;
  bool contrastive = true;
  bool negative_learning = true;  // off forces the positive classification loss
  bool temporal_exclusion = true;
  bool uncertainty_reweighting = true;

  // Pilot-tuned training schedule. The gentle source learning rate keeps the
  // source model from collapsing its features onto the decision boundary,
  // which the neighbour vote depends on after the shift.
  int epochs = 200;
  int batch_size = 64;
  double learning_rate = 0.005;
  double sgd_momentum = 0.9;
  int source_epochs = 50;
  double source_learning_rate = 0.01;
  double label_smoothing = 0.1;

  std::uint64_t seed = 0;
  bool save_models = false;
  bool dump_data = false;
  bool dump_diagnostics = false;
};

/// Parses the key/value run-config format. Unknown sections or keys are
/// rejected with the offending name in the error message.
AdaptationConfig parse_config(const std::string& text);
AdaptationConfig load_config(const std::string& path);

/// Serializes every field (defaults included); parse(serialize(c)) == c.
std::string serialize_config(const AdaptationConfig& config);
void save_config(const AdaptationConfig& config, const std::string& path);

bool operator==(const AdaptationConfig& a, const AdaptationConfig& b);

/// Applies a single "section.key=value" override.
void set_config_value(AdaptationConfig& config, const std::string& key, const std::string& value);
std::string get_config_value(const AdaptationConfig& config, const std::string& key);

}  // namespace sfuda
