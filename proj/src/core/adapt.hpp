#pragma once

#include <memory>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/data.hpp"
#include "core/memory.hpp"
#include "core/model.hpp"

namespace sfuda {

struct EpochMetrics {
  int epoch = 0;
  double target_accuracy = 0.0;
  double pseudo_label_accuracy = 0.0;
  double mean_weight = 0.0;
  double kept_negative_fraction = 1.0;
  double loss_cls = 0.0;
  double loss_ctr = 0.0;
  double loss_div = 0.0;
};

// Running invariant audit over a whole run: simplex checks on emitted
// probability vectors and the EMA convex-envelope check.
struct AuditReport {
  long long prob_vectors_checked = 0;
  long long simplex_violations = 0;
  long long ema_checks = 0;
  long long ema_violations = 0;
};

struct DiagnosticsRow {
  int epoch = 0;
  std::size_t queue_length = 0;
  double mask_kept_fraction = 1.0;
};

struct RunResult {
  std::vector<EpochMetrics> metrics;
  std::vector<DiagnosticsRow> diagnostics;
  ModelParams final_online;
  ModelParams final_momentum;
  double source_accuracy = 0.0;             // source model on source data
  double source_only_target_accuracy = 0.0;  // source model on target data
  double initial_pseudo_label_accuracy = 0.0;
  AuditReport audit;
  double wall_seconds = 0.0;
};

double evaluate(const ModelParams& model, const std::vector<Sample>& dataset);

ModelParams train_source(const AdaptationConfig& config, const std::vector<Sample>& source,
                         std::uint64_t seed);

// Adaptation state, exposed so tests can drive single epochs.
struct AdaptationState;

void destroy_state(AdaptationState* state);

struct StateDeleter {
  void operator()(AdaptationState* s) const { destroy_state(s); }
};
using StatePtr = std::unique_ptr<AdaptationState, StateDeleter>;

StatePtr init_adaptation(const AdaptationConfig& config, const DomainPair& pair,
                         const ModelParams& source_model, std::uint64_t seed);
EpochMetrics adapt_epoch(AdaptationState& state);
const ModelParams& online_model(const AdaptationState& state);
const AuditReport& audit_report(const AdaptationState& state);
double initial_pseudo_label_accuracy(const AdaptationState& state);

RunResult run_adaptation(const AdaptationConfig& config, std::uint64_t seed);

void write_metrics_csv(const std::vector<EpochMetrics>& metrics, const std::string& path);
void write_diagnostics_csv(const std::vector<DiagnosticsRow>& rows, const std::string& path);
void write_summary(const AdaptationConfig& config, std::uint64_t seed, const RunResult& result,
                   const std::string& path);

struct AblationCell {
  std::string name;
  AdaptationConfig config;
};

/// Cumulative component rows, the weighting/loss variants, and the
/// history-length sweep.
std::vector<AblationCell> ablation_grid(const AdaptationConfig& base);

}  // namespace sfuda
