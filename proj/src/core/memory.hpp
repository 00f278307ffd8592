#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <vector>

#include "core/numerics.hpp"

namespace sfuda {

struct BankEntry {
  RealVector feature;     // unit norm
  RealVector prediction;  // probability vector
};

// Per-sample store of momentum-model feature/prediction pairs used for
// neighbour search. One slot per sample_id, at most `capacity` slots.
class FeatureBank {
 public:
  explicit FeatureBank(std::size_t capacity);

  void begin_epoch();
  void update(std::int64_t sample_id, const RealVector& feature, const RealVector& prediction);

  /// K nearest entries by cosine distance, ascending, ties by ascending id.
  /// The query's own slot (exclude_id) is never returned.
  std::vector<std::pair<std::int64_t, RealVector>> knn(const RealVector& z, int k,
                                                       std::int64_t exclude_id = -1) const;

  std::size_t size() const { return slots_.size(); }
  std::size_t capacity() const { return capacity_; }
  const std::map<std::int64_t, BankEntry>& slots() const { return slots_; }

 private:
  std::size_t capacity_;
  std::map<std::int64_t, BankEntry> slots_;
  std::set<std::int64_t> seen_this_epoch_;
};

// Ring of the last T refined pseudo-labels per sample, newest last.
class LabelHistoryStore {
 public:
  explicit LabelHistoryStore(int max_len);

  void append(std::int64_t sample_id, int label);
  const std::vector<int>& history(std::int64_t sample_id) const;

 private:
  int max_len_;
  std::map<std::int64_t, std::vector<int>> histories_;
  std::vector<int> empty_;
};

struct QueueEntry {
  RealVector key;            // unit norm
  std::vector<int> history;  // snapshot at push time, newest last
};

class TemporalQueue {
 public:
  explicit TemporalQueue(std::size_t capacity);

  void push(const std::vector<RealVector>& keys,
            const std::vector<std::vector<int>>& snapshots);

  std::size_t size() const { return entries_.size(); }
  const std::deque<QueueEntry>& entries() const { return entries_; }

 private:
  std::size_t capacity_;
  std::deque<QueueEntry> entries_;
};

enum class ExclusionRule {
  kAlignedEpochs,    // same pseudo-label at some aligned past epoch
  kAnyIntersection,  // label multisets intersect anywhere in the window
};

/// true = keep as negative. Histories are aligned newest-last; only offsets
/// present in both histories are compared under kAlignedEpochs.
std::vector<bool> exclusion_mask(const std::vector<int>& query_history,
                                 const TemporalQueue& queue,
                                 ExclusionRule rule = ExclusionRule::kAlignedEpochs);

}  // namespace sfuda
