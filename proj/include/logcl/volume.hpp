#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "logcl/backends.hpp"
#include "logcl/ledger.hpp"
#include "logcl/scheduler.hpp"

// Large-volume variant: buckets hold L*2^k samples and the binary counter
// counts units of L. Incoming samples wait in a raw side buffer of capacity
// L-1; every group of L flushes as one unit. With L=1 the buffer is always
// empty and the behavior reduces exactly to the base scheduler.

namespace logcl {

struct IngestResult {
  std::vector<RepackPlan> unit_plans;   // in unit space; at most one per ingest
  std::vector<FreshSample> flushed;     // samples leaving the buffer, in id order
};

class ScaledCounter {
 public:
  explicit ScaledCounter(std::uint32_t unit);

  // Buffers the batch and flushes every complete unit. All units completed by
  // one ingest are consolidated into a single plan so a task never replays
  // its own samples.
  IngestResult ingest(std::span<const FreshSample> batch);

  std::uint32_t unit() const { return unit_; }
  std::uint64_t flushed_units() const { return flushed_units_; }
  std::uint64_t total_samples() const { return flushed_units_ * unit_ + pending_.size(); }
  std::span<const FreshSample> side_buffer() const { return pending_; }

 private:
  std::uint32_t unit_;
  std::uint64_t flushed_units_ = 0;
  std::vector<FreshSample> pending_;
};

// Maps a unit-space plan onto sample ids: unit range [lo, hi] covers samples
// [(lo-1)*L + 1, hi*L]. Identity for L=1.
RepackPlan scale_plan(const RepackPlan& unit_plan, std::uint32_t unit);

// Full scheduler system as the harness drives it: scaled counter feeding a
// ledger, one step per task. Buffered samples are counted in the metrics with
// error 0 and raw per-sample memory cost.
class LogClSystem {
 public:
  LogClSystem(std::uint32_t unit, std::shared_ptr<LocalModelBackend> backend,
              std::shared_ptr<const OriginalRegistry> source, MemoryModel memory,
              LedgerOptions opts = {});

  MetricsRow step(std::span<const FreshSample> fresh);

  const Ledger& ledger() const { return ledger_; }
  const ScaledCounter& counter() const { return counter_; }
  std::uint64_t total_samples() const { return counter_.total_samples(); }
  ErrorHistogram error_histogram(std::span<const double> edges) const;

 private:
  ScaledCounter counter_;
  Ledger ledger_;
  std::shared_ptr<LocalModelBackend> backend_;
  std::shared_ptr<const OriginalRegistry> source_;
  MemoryModel memory_;
  std::uint32_t task_ = 0;
};

}  // namespace logcl
