#include "core/memory.hpp"

#include <algorithm>

namespace sfuda {

FeatureBank::FeatureBank(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw Error("bank capacity must be positive");
}

void FeatureBank::begin_epoch() { seen_this_epoch_.clear(); }

void FeatureBank::update(std::int64_t sample_id, const RealVector& feature,
                         const RealVector& prediction) {
  check_prob_vector(prediction);
  RealVector unit = l2_normalize(feature);
  if (slots_.count(sample_id) == 0 && slots_.size() >= capacity_) {
    // Evict the smallest id not refreshed this epoch; fall back to the
    // smallest id overall when every slot was refreshed.
    std::int64_t victim = -1;
    for (const auto& [id, entry] : slots_) {
      if (seen_this_epoch_.count(id) == 0) {
        victim = id;
        break;
      }
    }
    if (victim < 0) victim = slots_.begin()->first;
    slots_.erase(victim);
  }
  slots_[sample_id] = {std::move(unit), prediction};
  seen_this_epoch_.insert(sample_id);
}

std::vector<std::pair<std::int64_t, RealVector>> FeatureBank::knn(
    const RealVector& z, int k, std::int64_t exclude_id) const {
  if (k < 1) throw Error("k must be positive");
  std::vector<std::pair<double, std::int64_t>> scored;
  scored.reserve(slots_.size());
  for (const auto& [id, entry] : slots_) {
    if (id == exclude_id) continue;
    scored.emplace_back(cosine_distance(z, entry.feature), id);
  }
  if (scored.size() < static_cast<std::size_t>(k)) throw Error("bank underfilled");
  std::partial_sort(scored.begin(), scored.begin() + k, scored.end());
  std::vector<std::pair<std::int64_t, RealVector>> out;
  out.reserve(k);
  for (int i = 0; i < k; ++i) {
    const std::int64_t id = scored[i].second;
    out.emplace_back(id, slots_.at(id).prediction);
  }
  return out;
}

LabelHistoryStore::LabelHistoryStore(int max_len) : max_len_(max_len) {
  if (max_len < 1) throw Error("history length must be positive");
}

void LabelHistoryStore::append(std::int64_t sample_id, int label) {
  if (label < 0) throw Error("negative label");
  std::vector<int>& h = histories_[sample_id];
  h.push_back(label);
  if (static_cast<int>(h.size()) > max_len_) h.erase(h.begin());
}

const std::vector<int>& LabelHistoryStore::history(std::int64_t sample_id) const {
  auto it = histories_.find(sample_id);
  return it == histories_.end() ? empty_ : it->second;
}

TemporalQueue::TemporalQueue(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw Error("queue capacity must be positive");
}

void TemporalQueue::push(const std::vector<RealVector>& keys,
                         const std::vector<std::vector<int>>& snapshots) {
  if (keys.size() != snapshots.size()) throw Error("keys/snapshots size mismatch");
  for (std::size_t i = 0; i < keys.size(); ++i) {
    entries_.push_back({l2_normalize(keys[i]), snapshots[i]});
    if (entries_.size() > capacity_) entries_.pop_front();
  }
}

std::vector<bool> exclusion_mask(const std::vector<int>& query_history,
                                 const TemporalQueue& queue, ExclusionRule rule) {
  std::vector<bool> mask;
  mask.reserve(queue.size());
  for (const QueueEntry& entry : queue.entries()) {
    bool shared = false;
    if (rule == ExclusionRule::kAlignedEpochs) {
      const std::size_t overlap = std::min(query_history.size(), entry.history.size());
      for (std::size_t i = 1; i <= overlap && !shared; ++i) {
        shared = query_history[query_history.size() - i] == entry.history[entry.history.size() - i];
      }
    } else {
      for (int a : query_history) {
        if (std::find(entry.history.begin(), entry.history.end(), a) != entry.history.end()) {
          shared = true;
          break;
        }
      }
    }
    mask.push_back(!shared);
  }
  return mask;
}

}  // namespace sfuda
