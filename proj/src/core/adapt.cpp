#include "core/adapt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "core/losses.hpp"
#include "core/refine.hpp"
#include "core/rng.hpp"

namespace sfuda {

namespace {

constexpr double kEnvelopeTol = 1e-9;

std::vector<std::vector<std::size_t>> make_batches(std::size_t n, int batch_size,
                                                   std::mt19937_64& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < n; i += batch_size) {
    batches.emplace_back(order.begin() + i,
                         order.begin() + std::min(n, i + static_cast<std::size_t>(batch_size)));
  }
  return batches;
}

void audit_probs(AuditReport& audit, const RealVector& probs) {
  ++audit.prob_vectors_checked;
  if (!is_prob_vector(probs)) ++audit.simplex_violations;
}

}  // namespace

double evaluate(const ModelParams& model, const std::vector<Sample>& dataset) {
  if (dataset.empty()) throw Error("empty dataset");
  std::size_t correct = 0;
  for (const Sample& s : dataset) {
    const ForwardCache cache = forward(model, s.x);
    if (refine_label(cache.probs) == s.true_label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

ModelParams train_source(const AdaptationConfig& config, const std::vector<Sample>& source,
                         std::uint64_t seed) {
  if (source.empty()) throw Error("empty source set");
  const int c = config.data.classes;
  for (const Sample& s : source) {
    if (s.true_label < 0 || s.true_label >= c) throw Error("unlabelled source sample");
  }
  const double eps = config.label_smoothing;
  if (!(eps >= 0.0 && eps < 0.5)) throw Error("label smoothing out of [0, 0.5)");

  ModelConfig mc = config.model;
  mc.num_classes = c;
  std::mt19937_64 init_rng = make_stream(seed, Stream::kModelInit);
  ModelParams params = init_model(mc, init_rng);
  ParamGrads buffers = zero_grads(params);
  std::mt19937_64 shuffle_rng = make_stream(seed, Stream::kSourceTrain);

  for (int epoch = 0; epoch < config.source_epochs; ++epoch) {
    for (const auto& batch : make_batches(source.size(), config.batch_size, shuffle_rng)) {
      ParamGrads grads = zero_grads(params);
      const double inv_b = 1.0 / static_cast<double>(batch.size());
      for (std::size_t idx : batch) {
        const Sample& s = source[idx];
        const ForwardCache cache = forward(params, s.x);
        // Label-smoothed cross-entropy: grad over logits is p - q_smooth.
        RealVector dlogits(c);
        for (int j = 0; j < c; ++j) {
          const double target = (j == s.true_label) ? 1.0 - eps : eps / (c - 1);
          dlogits[j] = inv_b * (cache.probs[j] - target);
        }
        accumulate_backward(params, cache, dlogits, {}, grads);
      }
      apply_sgd(params, grads, config.source_learning_rate, buffers, config.sgd_momentum);
    }
  }
  return params;
}

struct AdaptationState {
  AdaptationConfig config;
  std::vector<Sample> target;
  ModelParams online;
  ModelParams momentum;
  ParamGrads sgd_buffers;
  FeatureBank bank;
  LabelHistoryStore histories;
  TemporalQueue queue;
  std::vector<int> current_refined;  // indexed like target
  int epoch = 0;
  std::mt19937_64 weak_rng, strong_q_rng, strong_k_rng, comp_rng, shuffle_rng;
  RealVector envelope_min, envelope_max;
  AuditReport audit;
  double initial_pl_accuracy = 0.0;
  std::vector<DiagnosticsRow> diagnostics;

  AdaptationState(const AdaptationConfig& cfg, std::size_t bank_capacity)
      : config(cfg),
        bank(bank_capacity),
        histories(cfg.history_len),
        queue(cfg.queue_capacity) {}
};

void destroy_state(AdaptationState* state) { delete state; }

const ModelParams& online_model(const AdaptationState& state) { return state.online; }
const AuditReport& audit_report(const AdaptationState& state) { return state.audit; }
double initial_pseudo_label_accuracy(const AdaptationState& state) {
  return state.initial_pl_accuracy;
}

StatePtr init_adaptation(const AdaptationConfig& config, const DomainPair& pair,
                         const ModelParams& source_model, std::uint64_t seed) {
  if (pair.target.empty()) throw Error("empty target set");
  if (config.k_neighbors < 1) throw Error("k_neighbors must be positive");
  if (config.history_len < 1) throw Error("history_len must be positive");

  // One bank slot per target sample (M = |target|).
  StatePtr state(new AdaptationState(config, pair.target.size()));
  state->target = pair.target;
  state->online = source_model;
  state->momentum = source_model;
  state->sgd_buffers = zero_grads(state->online);
  state->weak_rng = make_stream(seed, Stream::kWeakAug);
  state->strong_q_rng = make_stream(seed, Stream::kStrongAugQuery);
  state->strong_k_rng = make_stream(seed, Stream::kStrongAugKey);
  state->comp_rng = make_stream(seed, Stream::kComplementary);
  state->shuffle_rng = make_stream(seed, Stream::kShuffle);

  // Initial pseudo-labels from the source model on clean inputs.
  std::size_t correct = 0;
  state->current_refined.resize(state->target.size());
  for (std::size_t i = 0; i < state->target.size(); ++i) {
    const Sample& s = state->target[i];
    const ForwardCache cache = forward(state->online, s.x);
    audit_probs(state->audit, cache.probs);
    const int label = refine_label(cache.probs);
    state->current_refined[i] = label;
    state->histories.append(s.sample_id, label);
    if (label == s.true_label) ++correct;
  }
  state->initial_pl_accuracy =
      static_cast<double>(correct) / static_cast<double>(state->target.size());

  // Fill the bank with momentum-model outputs of weakly augmented inputs.
  for (const Sample& s : state->target) {
    const RealVector x_wa = weak_augment(s.x, config.data.sigma_weak, state->weak_rng);
    const ForwardCache cache = forward(state->momentum, x_wa);
    audit_probs(state->audit, cache.probs);
    state->bank.update(s.sample_id, cache.z, cache.probs);
  }

  state->envelope_min = flatten_params(state->momentum);
  state->envelope_max = state->envelope_min;
  return state;
}

EpochMetrics adapt_epoch(AdaptationState& state) {
  const AdaptationConfig& cfg = state.config;
  const std::size_t n = state.target.size();
  state.epoch += 1;
  state.bank.begin_epoch();

  const bool need_vote = cfg.refinement || cfg.uncertainty_reweighting;
  double weight_sum = 0.0;
  std::size_t weight_count = 0;
  double kept_sum = 0.0;
  std::size_t kept_count = 0;
  double cls_sum = 0.0, ctr_sum = 0.0, div_sum = 0.0;
  std::size_t batch_count = 0;

  for (const auto& batch : make_batches(n, cfg.batch_size, state.shuffle_rng)) {
    const std::size_t b = batch.size();
    std::vector<ForwardCache> query_caches(b);
    std::vector<RefinedLabel> refined(b);
    std::vector<RealVector> logits_batch(b);
    std::vector<RealVector> weak_inputs(b);
    std::vector<RealVector> keys(b);
    std::vector<ContrastiveLoss> ctr_losses;

    for (std::size_t bi = 0; bi < b; ++bi) {
      const Sample& s = state.target[batch[bi]];
      // (1) weak augmentation, online features for neighbour search.
      weak_inputs[bi] = weak_augment(s.x, cfg.data.sigma_weak, state.weak_rng);

      // (2) refinement and uncertainty weighting.
      RefinedLabel r;
      r.label = state.current_refined[batch[bi]];
      r.weight = 1.0;
      if (need_vote) {
        const ForwardCache wa_cache = forward(state.online, weak_inputs[bi]);
        audit_probs(state.audit, wa_cache.probs);
        const auto neighbours = state.bank.knn(wa_cache.z, cfg.k_neighbors, s.sample_id);
        std::vector<RealVector> preds;
        preds.reserve(neighbours.size());
        for (const auto& [id, p] : neighbours) preds.push_back(p);
        r.averaged_scores = soft_vote(preds);
        if (cfg.refinement) {
          r.label = refine_label(r.averaged_scores);
          state.current_refined[batch[bi]] = r.label;
        }
        if (cfg.uncertainty_reweighting) {
          r.weight = uncertainty_weight(r.averaged_scores, cfg.weighting_mode, cfg.hard_threshold);
        }
      }
      refined[bi] = r;
      weight_sum += r.weight;
      ++weight_count;

      // (3) strong augmentations: query/classification from the online model,
      // key from the momentum model.
      const RealVector x_q = strong_augment(s.x, cfg.data, state.strong_q_rng);
      query_caches[bi] = forward(state.online, x_q);
      audit_probs(state.audit, query_caches[bi].probs);
      logits_batch[bi] = query_caches[bi].logits;

      if (cfg.contrastive) {
        const RealVector x_k = strong_augment(s.x, cfg.data, state.strong_k_rng);
        keys[bi] = l2_normalize(forward(state.momentum, x_k).z);

        // (4) negative-pair exclusion from pseudo-label histories.
        std::vector<bool> mask;
        if (cfg.temporal_exclusion) {
          mask = exclusion_mask(state.histories.history(s.sample_id), state.queue,
                                cfg.exclusion_rule);
        } else {
          mask.assign(state.queue.size(), true);
        }
        for (bool keep : mask) kept_sum += keep ? 1.0 : 0.0;
        kept_count += mask.size();

        const RealVector q = l2_normalize(query_caches[bi].z);
        ctr_losses.push_back(contrastive_loss(q, keys[bi], state.queue, mask, cfg.temperature));
      }
    }

    // (5) losses and one optimizer step on the online model.
    const ClassificationMode mode =
        cfg.negative_learning ? cfg.classification_mode : ClassificationMode::kPositive;
    const BatchLoss cls = classification_loss(logits_batch, refined, mode, state.comp_rng);
    const BatchLoss div = diversity_loss(logits_batch);
    const TargetStepLoss total =
        total_loss(cls, ctr_losses, div, cfg.gamma_cls, cfg.gamma_ctr, cfg.gamma_div);
    cls_sum += total.cls;
    ctr_sum += total.ctr;
    div_sum += total.div;
    ++batch_count;

    ParamGrads grads = zero_grads(state.online);
    for (std::size_t bi = 0; bi < b; ++bi) {
      RealVector dz;
      if (!total.grad_queries.empty()) {
        dz = l2_normalize_backward(query_caches[bi].z, total.grad_queries[bi]);
      }
      accumulate_backward(state.online, query_caches[bi], total.grad_logits[bi], dz, grads);
    }
    apply_sgd(state.online, grads, cfg.learning_rate, state.sgd_buffers, cfg.sgd_momentum);

    // (6) EMA update, with the convex-envelope audit.
    const RealVector online_flat = flatten_params(state.online);
    for (std::size_t i = 0; i < online_flat.size(); ++i) {
      state.envelope_min[i] = std::min(state.envelope_min[i], online_flat[i]);
      state.envelope_max[i] = std::max(state.envelope_max[i], online_flat[i]);
    }
    ema_update(state.momentum, state.online, cfg.ema_momentum);
    const RealVector mom_flat = flatten_params(state.momentum);
    ++state.audit.ema_checks;
    for (std::size_t i = 0; i < mom_flat.size(); ++i) {
      if (mom_flat[i] < state.envelope_min[i] - kEnvelopeTol ||
          mom_flat[i] > state.envelope_max[i] + kEnvelopeTol) {
        ++state.audit.ema_violations;
        break;
      }
    }

    // (7) bank refresh with post-update momentum outputs of the weak views.
    for (std::size_t bi = 0; bi < b; ++bi) {
      const Sample& s = state.target[batch[bi]];
      const ForwardCache cache = forward(state.momentum, weak_inputs[bi]);
      audit_probs(state.audit, cache.probs);
      state.bank.update(s.sample_id, cache.z, cache.probs);
    }

    // (8) queue push with history snapshots.
    if (cfg.contrastive) {
      std::vector<std::vector<int>> snapshots;
      snapshots.reserve(b);
      for (std::size_t bi = 0; bi < b; ++bi)
        snapshots.push_back(state.histories.history(state.target[batch[bi]].sample_id));
      state.queue.push(keys, snapshots);
    }
  }

  // Histories advance once per epoch with the last refined label.
  for (std::size_t i = 0; i < n; ++i)
    state.histories.append(state.target[i].sample_id, state.current_refined[i]);

  EpochMetrics metrics;
  metrics.epoch = state.epoch;
  metrics.target_accuracy = evaluate(state.online, state.target);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (state.current_refined[i] == state.target[i].true_label) ++correct;
  metrics.pseudo_label_accuracy = static_cast<double>(correct) / static_cast<double>(n);
  metrics.mean_weight = weight_count ? weight_sum / static_cast<double>(weight_count) : 1.0;
  metrics.kept_negative_fraction =
      kept_count ? kept_sum / static_cast<double>(kept_count) : 1.0;
  if (batch_count) {
    metrics.loss_cls = cls_sum / static_cast<double>(batch_count);
    metrics.loss_ctr = ctr_sum / static_cast<double>(batch_count);
    metrics.loss_div = div_sum / static_cast<double>(batch_count);
  }
  state.diagnostics.push_back({state.epoch, state.queue.size(), metrics.kept_negative_fraction});
  return metrics;
}

RunResult run_adaptation(const AdaptationConfig& config, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  const DomainPair pair = generate_domain_pair(config.data, seed);

  RunResult result;
  const ModelParams source_model = train_source(config, pair.source, seed);
  result.source_accuracy = evaluate(source_model, pair.source);
  result.source_only_target_accuracy = evaluate(source_model, pair.target);

  StatePtr state = init_adaptation(config, pair, source_model, seed);
  result.initial_pseudo_label_accuracy = initial_pseudo_label_accuracy(*state);
  for (int e = 0; e < config.epochs; ++e) result.metrics.push_back(adapt_epoch(*state));

  result.final_online = state->online;
  result.final_momentum = state->momentum;
  result.audit = audit_report(*state);
  result.diagnostics = state->diagnostics;
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

void write_metrics_csv(const std::vector<EpochMetrics>& metrics, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open metrics file for writing: " + path);
  out << "# sfuda-metrics v1\n";
  out << "epoch,target_acc,pl_acc,mean_weight,kept_negative_fraction,loss_cls,loss_ctr,loss_div\n";
  char buf[256];
  for (const EpochMetrics& m : metrics) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", m.epoch,
                  m.target_accuracy, m.pseudo_label_accuracy, m.mean_weight,
                  m.kept_negative_fraction, m.loss_cls, m.loss_ctr, m.loss_div);
    out << buf << "\n";
  }
  if (!out) throw Error("write failure: " + path);
}

void write_diagnostics_csv(const std::vector<DiagnosticsRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open diagnostics file for writing: " + path);
  out << "# sfuda-diagnostics v1\n";
  out << "epoch,queue_length,mask_kept_fraction\n";
  char buf[128];
  for (const DiagnosticsRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%zu,%.17g", r.epoch, r.queue_length,
                  r.mask_kept_fraction);
    out << buf << "\n";
  }
}

void write_summary(const AdaptationConfig& config, std::uint64_t seed, const RunResult& result,
                   const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open summary file for writing: " + path);
  char buf[128];
  auto kv = [&](const char* key, double v) {
    std::snprintf(buf, sizeof(buf), "%s = %.17g", key, v);
    out << buf << "\n";
  };
  out << "# sfuda-summary v1\n";
  out << "seed = " << seed << "\n";
  out << "epochs_run = " << result.metrics.size() << "\n";
  kv("source_accuracy", result.source_accuracy);
  kv("source_only_target_accuracy", result.source_only_target_accuracy);
  kv("initial_pseudo_label_accuracy", result.initial_pseudo_label_accuracy);
  if (!result.metrics.empty()) {
    kv("final_target_accuracy", result.metrics.back().target_accuracy);
    kv("final_pseudo_label_accuracy", result.metrics.back().pseudo_label_accuracy);
  }
  out << "audit_prob_vectors_checked = " << result.audit.prob_vectors_checked << "\n";
  out << "audit_simplex_violations = " << result.audit.simplex_violations << "\n";
  out << "audit_ema_checks = " << result.audit.ema_checks << "\n";
  out << "audit_ema_violations = " << result.audit.ema_violations << "\n";
  kv("wall_seconds", result.wall_seconds);
  // Effective config echo, defaults included.
  out << serialize_config(config);
  if (!out) throw Error("write failure: " + path);
}

std::vector<AblationCell> ablation_grid(const AdaptationConfig& base) {
  std::vector<AblationCell> cells;
  auto add = [&](const std::string& name, auto&& mutate) {
    AdaptationConfig c = base;
    c.refinement = true;
    c.contrastive = true;
    c.negative_learning = true;
    c.temporal_exclusion = true;
    c.uncertainty_reweighting = true;
    c.classification_mode = ClassificationMode::kNegative;
    c.weighting_mode = WeightingMode::kExponential;
    mutate(c);
    cells.push_back({name, c});
  };

  // Cumulative component rows.
  add("refine_only", [](AdaptationConfig& c) {
    c.contrastive = false;
    c.negative_learning = false;
    c.temporal_exclusion = false;
    c.uncertainty_reweighting = false;
  });
  add("refine_contrastive", [](AdaptationConfig& c) {
    c.negative_learning = false;
    c.temporal_exclusion = false;
    c.uncertainty_reweighting = false;
  });
  add("refine_contrastive_negative", [](AdaptationConfig& c) {
    c.temporal_exclusion = false;
    c.uncertainty_reweighting = false;
  });
  add("refine_contrastive_negative_temporal",
      [](AdaptationConfig& c) { c.uncertainty_reweighting = false; });
  add("full", [](AdaptationConfig&) {});

  // Weighting and classification-loss variants on top of the full pipeline.
  add("hard_weighting", [](AdaptationConfig& c) { c.weighting_mode = WeightingMode::kHard; });
  add("linear_weighting", [](AdaptationConfig& c) { c.weighting_mode = WeightingMode::kLinear; });
  add("positive_loss",
      [](AdaptationConfig& c) { c.classification_mode = ClassificationMode::kPositive; });
  add("positive_negative_loss",
      [](AdaptationConfig& c) { c.classification_mode = ClassificationMode::kPositiveNegative; });

  // History-length sweep.
  for (int t : {1, 2, 5, 8}) {
    add("queue_T" + std::to_string(t), [t](AdaptationConfig& c) { c.history_len = t; });
  }
  return cells;
}

}  // namespace sfuda
