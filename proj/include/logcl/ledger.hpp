#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "logcl/backends.hpp"
#include "logcl/scheduler.hpp"

// Sample-lifecycle bookkeeping: who sits in which bucket, how often each
// sample has been replayed into a new bucket, when, and with what
// reconstruction error. One ledger is single-writer: apply_plan mutates,
// queries read between mutations.

namespace logcl {

struct LedgerOptions {
  bool track_history = true;       // keep per-sample retrain task ordinals
  bool compute_error_stats = true; // per-task mean/p95 over all samples
};

struct SampleRecord {
  SampleId id = 0;
  Label label = 0;
  std::uint32_t birth_task = 0;
  BucketIndex bucket = 0;
  std::uint32_t replay_count = 0;
  double error = 0.0;
  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

// One accounting row per (system, task). Serialized schema lives with the
// CLI harness.
struct MetricsRow {
  std::uint32_t task = 0;
  std::uint64_t total_samples = 0;
  std::uint32_t model_count = 0;
  double memory_units = 0.0;
  std::uint32_t retrained_buckets = 0;
  std::uint64_t replayed_samples = 0;
  std::uint64_t fresh_samples = 0;
  std::uint32_t max_replay_count = 0;
  double mean_error = 0.0;
  double p95_error = 0.0;
};

// Normalized error histogram with an explicit zero bin (the replay-buffer
// baseline puts all mass there). `bins[i]` covers [edges[i], edges[i+1]);
// nonzero errors outside the edges land in underflow/overflow.
struct ErrorHistogram {
  bool empty = true;
  double zero_mass = 0.0;
  double underflow = 0.0;
  double overflow = 0.0;
  std::vector<double> edges;
  std::vector<double> bin_mass;
};

double mean_of(std::span<const double> values);
// Nearest-rank percentile; pct in (0, 100]. Consumes (reorders) `values`.
double percentile_nearest_rank(std::vector<double>& values, double pct);
ErrorHistogram histogram_of(std::span<const double> errors, std::span<const double> edges);

// Record store shared by the logarithmic scheduler and the baselines so all
// systems report through the same metrics surface.
class RecordTable {
 public:
  explicit RecordTable(LedgerOptions opts = {});

  std::uint64_t size() const { return records_.size(); }
  const LedgerOptions& options() const { return opts_; }
  const SampleRecord& record(SampleId id) const;
  std::uint32_t replay_count(SampleId id) const { return record(id).replay_count; }
  std::uint32_t max_replay_count() const { return max_count_; }

  // Task ordinals at which the sample was replayed into a new bucket.
  // Requires track_history.
  const std::vector<std::uint32_t>& retrain_tasks(SampleId id) const;
  // Task gaps between successive replays, anchored at the birth task.
  std::vector<std::uint32_t> retrain_gaps(SampleId id) const;

  ErrorHistogram error_histogram(std::span<const double> edges) const;
  void collect_errors(std::vector<double>& out) const;
  double mean_error() const;
  double p95_error() const;

  // Mutation primitives (systems only).
  void append_fresh(SampleId id, Label label, BucketIndex bucket, std::uint32_t task);
  void mark_replayed(SampleId id, BucketIndex bucket, std::uint32_t task);
  void set_error(SampleId id, double error);

  friend bool operator==(const RecordTable& a, const RecordTable& b) {
    return a.records_ == b.records_ && a.histories_ == b.histories_;
  }

 private:
  friend class Ledger;  // bulk repack path writes records directly

  std::vector<SampleRecord> records_;  // id i lives at records_[i-1]
  std::vector<std::vector<std::uint32_t>> histories_;  // parallel; empty when history off
  std::uint32_t max_count_ = 0;
  LedgerOptions opts_;
};

// Per-bucket trained models. Small flat map keyed by bucket index.
class BucketStores {
 public:
  const TrainedModel* find(BucketIndex bucket) const;
  const TrainedModel& at(BucketIndex bucket) const;  // throws if absent
  void set(BucketIndex bucket, std::shared_ptr<const TrainedModel> model);
  void keep_only(std::span<const BucketIndex> buckets);
  std::size_t size() const { return stores_.size(); }

 private:
  std::vector<std::pair<BucketIndex, std::shared_ptr<const TrainedModel>>> stores_;
};

// The logarithmic scheduler's state: records + incrementally maintained
// bucket layout + per-bucket stores. The layout is derived from the applied
// plans, never recomputed from the total, so it can be checked against
// layout_of as an independent route.
class Ledger {
 public:
  explicit Ledger(LedgerOptions opts = {});

  std::uint64_t total() const { return layout_.total; }
  std::uint32_t task() const { return task_; }
  const BucketLayout& layout() const { return layout_; }
  const BucketStores& stores() const { return stores_; }
  const RecordTable& records() const { return table_; }

  std::uint32_t replay_count(SampleId id) const { return table_.replay_count(id); }
  const std::vector<std::uint32_t>& retrain_tasks(SampleId id) const {
    return table_.retrain_tasks(id);
  }
  std::vector<std::uint32_t> retrain_gaps(SampleId id) const { return table_.retrain_gaps(id); }
  ErrorHistogram error_histogram(std::span<const double> edges) const {
    return table_.error_histogram(edges);
  }

  // Executes one repack: invokes the backend once per bucket training,
  // increments replay counts of moved samples, admits the fresh ones, and
  // leaves untouched buckets bit-identical. `fresh` must cover exactly
  // (plan.old_total, plan.new_total] in order; payloads and labels for them
  // come from `source`.
  MetricsRow apply_plan(const RepackPlan& plan, LocalModelBackend& backend,
                        std::span<const FreshSample> fresh, const OriginalRegistry& source,
                        const MemoryModel& memory);

 private:
  RecordTable table_;
  BucketLayout layout_;
  BucketStores stores_;
  std::uint32_t task_ = 0;
  std::vector<TrainingExample> batch_;  // scratch reused across repacks
};

}  // namespace logcl
