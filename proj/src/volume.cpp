#include "logcl/volume.hpp"

#include <stdexcept>
#include <utility>

namespace logcl {

ScaledCounter::ScaledCounter(std::uint32_t unit) : unit_(unit) {
  if (unit_ == 0) throw std::invalid_argument("ScaledCounter: unit must be >= 1");
}

IngestResult ScaledCounter::ingest(std::span<const FreshSample> batch) {
  if (batch.empty()) throw std::invalid_argument("ScaledCounter: ingest batch is empty");
  for (const auto& s : batch) {
    if (s.id != total_samples() + 1)
      throw std::invalid_argument("ScaledCounter: sample ids must arrive consecutively (got " +
                                  std::to_string(s.id) + ")");
    pending_.push_back(s);
  }

  IngestResult result;
  const std::uint64_t complete = pending_.size() / unit_;
  if (complete > 0) {
    result.unit_plans.push_back(plan_repack(flushed_units_, complete));
    const auto flush_end = pending_.begin() + static_cast<std::ptrdiff_t>(complete * unit_);
    result.flushed.assign(pending_.begin(), flush_end);
    pending_.erase(pending_.begin(), flush_end);
    flushed_units_ += complete;
  }
  return result;
}

namespace {

IdRange scale_range(const IdRange& units, std::uint32_t unit) {
  if (units.empty()) return {};
  return {(units.lo - 1) * unit + 1, units.hi * unit};
}

}  // namespace

RepackPlan scale_plan(const RepackPlan& unit_plan, std::uint32_t unit) {
  if (unit == 0) throw std::invalid_argument("scale_plan: unit must be >= 1");
  RepackPlan plan;
  plan.old_total = unit_plan.old_total * unit;
  plan.new_total = unit_plan.new_total * unit;
  plan.pivot = unit_plan.pivot;
  plan.untouched = unit_plan.untouched;
  plan.trainings.reserve(unit_plan.trainings.size());
  for (const auto& t : unit_plan.trainings) {
    BucketTraining scaled;
    scaled.target = t.target;
    scaled.fresh = scale_range(t.fresh, unit);
    scaled.replayed.reserve(t.replayed.size());
    for (const auto& slice : t.replayed)
      scaled.replayed.push_back({slice.source, scale_range(slice.ids, unit)});
    plan.trainings.push_back(std::move(scaled));
  }
  return plan;
}

LogClSystem::LogClSystem(std::uint32_t unit, std::shared_ptr<LocalModelBackend> backend,
                         std::shared_ptr<const OriginalRegistry> source, MemoryModel memory,
                         LedgerOptions opts)
    : counter_(unit),
      ledger_(opts),
      backend_(std::move(backend)),
      source_(std::move(source)),
      memory_(memory) {
  if (!backend_) throw std::invalid_argument("LogClSystem: backend is required");
  if (!source_) throw std::invalid_argument("LogClSystem: sample source is required");
}

MetricsRow LogClSystem::step(std::span<const FreshSample> fresh) {
  ++task_;
  IngestResult ingest = counter_.ingest(fresh);

  MetricsRow row;
  if (!ingest.unit_plans.empty()) {
    const RepackPlan plan = scale_plan(ingest.unit_plans.front(), counter_.unit());
    row = ledger_.apply_plan(plan, *backend_, ingest.flushed, *source_, memory_);
  } else {
    row.model_count = static_cast<std::uint32_t>(ledger_.layout().entries.size());
    row.memory_units = total_memory(ledger_.layout(), memory_);
    row.max_replay_count = ledger_.records().max_replay_count();
    if (ledger_.records().options().compute_error_stats) {
      row.mean_error = ledger_.records().mean_error();
      row.p95_error = ledger_.records().p95_error();
    }
  }

  row.task = task_;

  // Fold the raw side buffer into the accounting: zero error, raw storage.
  const std::uint64_t buffered = counter_.side_buffer().size();
  row.total_samples = counter_.total_samples();
  row.memory_units += static_cast<double>(buffered) * memory_.per_sample_raw;
  if (buffered > 0 && ledger_.records().options().compute_error_stats) {
    std::vector<double> errors;
    ledger_.records().collect_errors(errors);
    errors.insert(errors.end(), buffered, 0.0);
    row.mean_error = mean_of(errors);
    row.p95_error = percentile_nearest_rank(errors, 95.0);
  }
  return row;
}

ErrorHistogram LogClSystem::error_histogram(std::span<const double> edges) const {
  std::vector<double> errors;
  ledger_.records().collect_errors(errors);
  errors.insert(errors.end(), counter_.side_buffer().size(), 0.0);
  return histogram_of(errors, edges);
}

}  // namespace logcl
