#pragma once

#include <cstdint>
#include <vector>

// Test-only oracles: second routes to the scheduler's answers built from
// plain arithmetic (greedy powers, per-sample scans) instead of the bit
// manipulation the library uses.

namespace logcl::testing {

struct OracleEntry {
  std::uint32_t bucket;
  std::uint64_t lo;
  std::uint64_t hi;
};

// Greedy largest-power-first assignment; equals the binary notation of the
// total by uniqueness of binary representations.
inline std::vector<OracleEntry> oracle_layout(std::uint64_t total) {
  std::vector<OracleEntry> entries;
  std::uint64_t next = 1;
  std::uint64_t remaining = total;
  while (remaining > 0) {
    std::uint64_t cap = 1;
    std::uint32_t k = 0;
    while (cap * 2 <= remaining) {
      cap *= 2;
      ++k;
    }
    entries.push_back({k, next, next + cap - 1});
    next += cap;
    remaining -= cap;
  }
  return entries;
}

// Brute-force binary-counter simulation, sample by sample: after each task,
// recompute every sample's bucket from scratch and count a replay whenever it
// changed. Tracks birth tasks and full retrain histories.
class CounterOracle {
 public:
  void add_task(std::uint64_t task_size) {
    ++task_;
    const std::uint64_t old_total = total_;
    total_ += task_size;
    buckets_.resize(total_, 0);
    counts_.resize(total_, 0);
    births_.resize(total_, 0);
    histories_.resize(total_);
    for (const auto& entry : oracle_layout(total_)) {
      for (std::uint64_t id = entry.lo; id <= entry.hi; ++id) {
        if (id > old_total) {
          births_[id - 1] = task_;
          buckets_[id - 1] = entry.bucket;
        } else if (buckets_[id - 1] != entry.bucket) {
          buckets_[id - 1] = entry.bucket;
          ++counts_[id - 1];
          histories_[id - 1].push_back(task_);
        }
      }
    }
  }

  std::uint64_t total() const { return total_; }
  std::uint32_t task() const { return task_; }
  std::uint32_t bucket(std::uint64_t id) const { return buckets_[id - 1]; }
  std::uint32_t count(std::uint64_t id) const { return counts_[id - 1]; }
  std::uint32_t birth(std::uint64_t id) const { return births_[id - 1]; }
  const std::vector<std::uint32_t>& history(std::uint64_t id) const { return histories_[id - 1]; }

  std::vector<std::uint32_t> gaps(std::uint64_t id) const {
    std::vector<std::uint32_t> out;
    std::uint32_t prev = births_[id - 1];
    for (const std::uint32_t t : histories_[id - 1]) {
      out.push_back(t - prev);
      prev = t;
    }
    return out;
  }

  std::uint32_t max_count() const {
    std::uint32_t best = 0;
    for (const auto c : counts_) best = best < c ? c : best;
    return best;
  }

 private:
  std::uint64_t total_ = 0;
  std::uint32_t task_ = 0;
  std::vector<std::uint32_t> buckets_;
  std::vector<std::uint32_t> counts_;
  std::vector<std::uint32_t> births_;
  std::vector<std::vector<std::uint32_t>> histories_;
};

}  // namespace logcl::testing
