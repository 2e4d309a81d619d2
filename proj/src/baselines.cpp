#include "logcl/baselines.hpp"

#include <stdexcept>
#include <utility>
#include <vector>

namespace logcl {

SingleReplaySystem::SingleReplaySystem(std::shared_ptr<LocalModelBackend> backend,
                                       std::shared_ptr<const OriginalRegistry> source,
                                       MemoryModel memory, LedgerOptions opts)
    : backend_(std::move(backend)), source_(std::move(source)), table_(opts), memory_(memory) {
  if (!backend_) throw std::invalid_argument("SingleReplaySystem: backend is required");
  if (!source_) throw std::invalid_argument("SingleReplaySystem: sample source is required");
}

MetricsRow SingleReplaySystem::step(std::span<const FreshSample> fresh) {
  if (fresh.empty()) throw std::invalid_argument("SingleReplaySystem: fresh batch is empty");
  const std::uint64_t old_total = table_.size();
  const std::uint32_t task = task_ + 1;

  std::vector<TrainingExample> batch;
  batch.reserve(old_total + fresh.size());
  for (SampleId id = 1; id <= old_total; ++id) {
    auto rec = model_->reconstruct(id);
    batch.push_back({id, rec.label, table_.replay_count(id) + 1, std::move(rec.payload)});
  }
  for (const auto& s : fresh) batch.push_back({s.id, s.label, 0, source_->payload(s.id)});

  model_ = backend_->train(batch);
  for (const auto& stored : model_->contents()) {
    if (stored.id > old_total) {
      table_.append_fresh(stored.id, stored.label, 0, task);
    } else {
      table_.mark_replayed(stored.id, 0, task);
    }
    table_.set_error(stored.id, stored.error);
  }

  task_ = task;
  MetricsRow row;
  row.task = task;
  row.total_samples = table_.size();
  row.model_count = 1;
  row.memory_units = memory_.s_max;
  row.retrained_buckets = 1;
  row.replayed_samples = old_total;
  row.fresh_samples = fresh.size();
  row.max_replay_count = table_.max_replay_count();
  if (table_.options().compute_error_stats) {
    row.mean_error = table_.mean_error();
    row.p95_error = table_.p95_error();
  }
  return row;
}

BufferSystem::BufferSystem(MemoryModel memory, LedgerOptions opts)
    : table_(opts), memory_(memory) {}

MetricsRow BufferSystem::step(std::span<const FreshSample> fresh) {
  if (fresh.empty()) throw std::invalid_argument("BufferSystem: fresh batch is empty");
  const std::uint32_t task = ++task_;
  for (const auto& s : fresh) table_.append_fresh(s.id, s.label, 0, task);

  MetricsRow row;
  row.task = task;
  row.total_samples = table_.size();
  row.model_count = 0;
  row.memory_units = static_cast<double>(table_.size()) * memory_.per_sample_raw;
  row.retrained_buckets = 0;
  row.replayed_samples = 0;
  row.fresh_samples = fresh.size();
  row.max_replay_count = 0;
  return row;
}

}  // namespace logcl
