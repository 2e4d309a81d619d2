#include "logcl/ledger.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace logcl {

double mean_of(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (const double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double percentile_nearest_rank(std::vector<double>& values, double pct) {
  if (values.empty()) return 0.0;
  if (pct <= 0.0 || pct > 100.0)
    throw std::invalid_argument("percentile_nearest_rank: pct must be in (0, 100]");
  const auto n = values.size();
  auto rank = static_cast<std::size_t>(std::ceil(pct / 100.0 * static_cast<double>(n)));
  if (rank == 0) rank = 1;
  if (rank > n) rank = n;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   values.end());
  return values[rank - 1];
}

ErrorHistogram histogram_of(std::span<const double> errors, std::span<const double> edges) {
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i - 1] < edges[i]))
      throw std::invalid_argument("histogram_of: bin edges must be strictly increasing");
  }
  ErrorHistogram h;
  h.edges.assign(edges.begin(), edges.end());
  h.bin_mass.assign(edges.empty() ? 0 : edges.size() - 1, 0.0);
  if (errors.empty()) return h;
  h.empty = false;

  // Count first, normalize once, so a single populated bin carries exactly 1.
  std::uint64_t zero = 0, under = 0, over = 0;
  std::vector<std::uint64_t> bins(h.bin_mass.size(), 0);
  for (const double e : errors) {
    if (e == 0.0) {
      ++zero;
    } else if (edges.empty() || e < edges.front()) {
      ++under;
    } else if (e >= edges.back()) {
      ++over;
    } else {
      const auto it = std::upper_bound(edges.begin(), edges.end(), e);
      ++bins[static_cast<std::size_t>(it - edges.begin()) - 1];
    }
  }
  const auto n = static_cast<double>(errors.size());
  h.zero_mass = static_cast<double>(zero) / n;
  h.underflow = static_cast<double>(under) / n;
  h.overflow = static_cast<double>(over) / n;
  for (std::size_t i = 0; i < bins.size(); ++i)
    h.bin_mass[i] = static_cast<double>(bins[i]) / n;
  return h;
}

RecordTable::RecordTable(LedgerOptions opts) : opts_(opts) {}

const SampleRecord& RecordTable::record(SampleId id) const {
  if (id == 0 || id > records_.size())
    throw std::out_of_range("ledger: unknown sample id " + std::to_string(id));
  return records_[id - 1];
}

const std::vector<std::uint32_t>& RecordTable::retrain_tasks(SampleId id) const {
  if (!opts_.track_history)
    throw std::logic_error("retrain_tasks: ledger was built with track_history off");
  if (id == 0 || id > histories_.size())
    throw std::out_of_range("ledger: unknown sample id " + std::to_string(id));
  return histories_[id - 1];
}

std::vector<std::uint32_t> RecordTable::retrain_gaps(SampleId id) const {
  const auto& tasks = retrain_tasks(id);
  std::vector<std::uint32_t> gaps;
  gaps.reserve(tasks.size());
  std::uint32_t prev = record(id).birth_task;
  for (const std::uint32_t t : tasks) {
    gaps.push_back(t - prev);
    prev = t;
  }
  return gaps;
}

void RecordTable::collect_errors(std::vector<double>& out) const {
  out.reserve(out.size() + records_.size());
  for (const auto& r : records_) out.push_back(r.error);
}

double RecordTable::mean_error() const {
  double sum = 0.0;
  for (const auto& r : records_) sum += r.error;
  return records_.empty() ? 0.0 : sum / static_cast<double>(records_.size());
}

double RecordTable::p95_error() const {
  std::vector<double> errors;
  collect_errors(errors);
  return percentile_nearest_rank(errors, 95.0);
}

ErrorHistogram RecordTable::error_histogram(std::span<const double> edges) const {
  std::vector<double> errors;
  collect_errors(errors);
  return histogram_of(errors, edges);
}

void RecordTable::append_fresh(SampleId id, Label label, BucketIndex bucket, std::uint32_t task) {
  if (id != records_.size() + 1)
    throw std::invalid_argument("ledger: fresh sample ids must arrive consecutively (got " +
                                std::to_string(id) + ", expected " +
                                std::to_string(records_.size() + 1) + ")");
  SampleRecord rec;
  rec.id = id;
  rec.label = label;
  rec.birth_task = task;
  rec.bucket = bucket;
  records_.push_back(rec);
  if (opts_.track_history) histories_.emplace_back();
}

void RecordTable::mark_replayed(SampleId id, BucketIndex bucket, std::uint32_t task) {
  if (id == 0 || id > records_.size())
    throw std::out_of_range("ledger: unknown sample id " + std::to_string(id));
  auto& rec = records_[id - 1];
  rec.bucket = bucket;
  ++rec.replay_count;
  if (opts_.track_history) histories_[id - 1].push_back(task);
  if (rec.replay_count > max_count_) max_count_ = rec.replay_count;
}

void RecordTable::set_error(SampleId id, double error) {
  if (id == 0 || id > records_.size())
    throw std::out_of_range("ledger: unknown sample id " + std::to_string(id));
  records_[id - 1].error = error;
}

const TrainedModel* BucketStores::find(BucketIndex bucket) const {
  for (const auto& [k, model] : stores_)
    if (k == bucket) return model.get();
  return nullptr;
}

const TrainedModel& BucketStores::at(BucketIndex bucket) const {
  const TrainedModel* model = find(bucket);
  if (!model) throw std::out_of_range("no trained store for bucket " + std::to_string(bucket));
  return *model;
}

void BucketStores::set(BucketIndex bucket, std::shared_ptr<const TrainedModel> model) {
  for (auto& [k, slot] : stores_) {
    if (k == bucket) {
      slot = std::move(model);
      return;
    }
  }
  stores_.emplace_back(bucket, std::move(model));
}

void BucketStores::keep_only(std::span<const BucketIndex> buckets) {
  std::erase_if(stores_, [&](const auto& entry) {
    return std::find(buckets.begin(), buckets.end(), entry.first) == buckets.end();
  });
}

Ledger::Ledger(LedgerOptions opts) : table_(opts) {}

MetricsRow Ledger::apply_plan(const RepackPlan& plan, LocalModelBackend& backend,
                              std::span<const FreshSample> fresh, const OriginalRegistry& source,
                              const MemoryModel& memory) {
  if (plan.old_total != layout_.total)
    throw std::invalid_argument("apply_plan: plan starts at total " +
                                std::to_string(plan.old_total) + " but ledger holds " +
                                std::to_string(layout_.total));
  const std::uint64_t expected_fresh = plan.new_total - plan.old_total;
  bool fresh_ok = fresh.size() == expected_fresh;
  for (std::size_t i = 0; fresh_ok && i < fresh.size(); ++i)
    fresh_ok = fresh[i].id == plan.old_total + 1 + i;
  if (!fresh_ok)
    throw std::invalid_argument("apply_plan: fresh records must cover exactly (" +
                                std::to_string(plan.old_total) + ", " +
                                std::to_string(plan.new_total) + "] in order");

  const std::uint32_t task = task_ + 1;

  // New layout starts from the untouched prefix of the current one.
  BucketLayout next_layout;
  next_layout.total = plan.new_total;
  for (const BucketIndex k : plan.untouched) {
    const auto it = std::find_if(layout_.entries.begin(), layout_.entries.end(),
                                 [&](const BucketEntry& e) { return e.bucket == k; });
    if (it == layout_.entries.end())
      throw std::invalid_argument("apply_plan: plan keeps bucket " + std::to_string(k) +
                                  " which the ledger does not hold");
    next_layout.entries.push_back(*it);
  }

  MetricsRow row;
  std::vector<TrainingExample>& batch = batch_;
  for (const auto& training : plan.trainings) {
    batch.clear();
    batch.reserve(training.input_count());
    IdRange span{0, 0};
    for (const auto& slice : training.replayed) {
      if (slice.ids.empty()) continue;
      const TrainedModel& src = stores_.at(slice.source);
      const bool with_payloads = src.payload_dim() > 0;
      const auto& contents = src.contents();
      // A slice always sweeps its source bucket whole, so the store contents
      // line up with the slice ids one to one.
      if (contents.size() != slice.ids.count() || contents.front().id != slice.ids.lo ||
          contents.back().id != slice.ids.hi)
        throw std::logic_error("apply_plan: store of bucket " + std::to_string(slice.source) +
                               " does not cover its slice");
      const bool history = table_.opts_.track_history;
      std::uint32_t slice_max = 0;
      for (const auto& stored : contents) {
        auto& rec = table_.records_[stored.id - 1];
        ++rec.replay_count;
        rec.bucket = training.target;
        if (history) table_.histories_[stored.id - 1].push_back(task);
        if (rec.replay_count > slice_max) slice_max = rec.replay_count;
        batch.push_back({stored.id, rec.label, rec.replay_count,
                         with_payloads ? src.reconstruct(stored.id).payload
                                       : std::vector<double>{}});
      }
      if (slice_max > table_.max_count_) table_.max_count_ = slice_max;
      if (span.lo == 0) span.lo = slice.ids.lo;
      span.hi = slice.ids.hi;
    }
    for (SampleId id = training.fresh.lo; id <= training.fresh.hi; ++id) {
      const Label label = fresh[id - plan.old_total - 1].label;
      table_.append_fresh(id, label, training.target, task);
      batch.push_back({id, label, 0, source.payload(id)});
    }
    if (!training.fresh.empty()) {
      if (span.lo == 0) span.lo = training.fresh.lo;
      span.hi = training.fresh.hi;
    }

    auto model = backend.train(batch);
    const auto& trained = model->contents();
    if (trained.size() != batch.size())
      throw std::logic_error("apply_plan: backend returned a different sample set");
    for (const auto& stored : trained) {
      if (stored.id == 0 || stored.id > table_.records_.size())
        throw std::logic_error("apply_plan: backend returned an unknown sample id");
      table_.records_[stored.id - 1].error = stored.error;
    }
    stores_.set(training.target, std::move(model));

    row.replayed_samples += training.replayed_count();
    row.fresh_samples += training.fresh.count();
    next_layout.entries.push_back({training.target, span});
  }

  std::sort(next_layout.entries.begin(), next_layout.entries.end(),
            [](const BucketEntry& a, const BucketEntry& b) { return a.bucket > b.bucket; });
  layout_ = std::move(next_layout);

  // Drop stores of swept source buckets.
  std::vector<BucketIndex> live;
  live.reserve(layout_.entries.size());
  for (const auto& e : layout_.entries) live.push_back(e.bucket);
  stores_.keep_only(live);

  task_ = task;
  row.task = task;
  row.total_samples = layout_.total;
  row.model_count = static_cast<std::uint32_t>(layout_.entries.size());
  row.memory_units = total_memory(layout_, memory);
  row.retrained_buckets = static_cast<std::uint32_t>(plan.trainings.size());
  row.max_replay_count = table_.max_replay_count();
  if (table_.options().compute_error_stats) {
    row.mean_error = table_.mean_error();
    row.p95_error = table_.p95_error();
  }
  return row;
}

}  // namespace logcl
