#pragma once

#include <cstdint>
#include <memory>
#include <span>

#include "logcl/backends.hpp"
#include "logcl/ledger.hpp"

// The two comparison systems: a single self-rehearsing generative store that
// retrains on everything after every task, and a raw replay buffer that keeps
// originals verbatim. Both report through the same RecordTable/MetricsRow
// surface as the logarithmic scheduler.

namespace logcl {

// One fixed-capacity store retrained each task on reconstructions of all
// prior samples plus the fresh batch; every prior sample's replay count grows
// by one per task, so a sample born in task b has count T - b after T tasks.
class SingleReplaySystem {
 public:
  SingleReplaySystem(std::shared_ptr<LocalModelBackend> backend,
                     std::shared_ptr<const OriginalRegistry> source, MemoryModel memory,
                     LedgerOptions opts = {});

  MetricsRow step(std::span<const FreshSample> fresh);

  const RecordTable& records() const { return table_; }
  std::uint64_t total_samples() const { return table_.size(); }
  ErrorHistogram error_histogram(std::span<const double> edges) const {
    return table_.error_histogram(edges);
  }

 private:
  std::shared_ptr<LocalModelBackend> backend_;
  std::shared_ptr<const OriginalRegistry> source_;
  std::shared_ptr<const TrainedModel> model_;
  RecordTable table_;
  MemoryModel memory_;
  std::uint32_t task_ = 0;
};

// Stores every sample verbatim: zero error everywhere, memory linear in the
// sample count.
class BufferSystem {
 public:
  explicit BufferSystem(MemoryModel memory, LedgerOptions opts = {});

  MetricsRow step(std::span<const FreshSample> fresh);

  const RecordTable& records() const { return table_; }
  std::uint64_t total_samples() const { return table_.size(); }
  ErrorHistogram error_histogram(std::span<const double> edges) const {
    return table_.error_histogram(edges);
  }

 private:
  RecordTable table_;
  MemoryModel memory_;
  std::uint32_t task_ = 0;
};

}  // namespace logcl
