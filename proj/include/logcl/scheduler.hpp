#pragma once

#include <cstdint>
#include <string>
#include <vector>

// Binary-counter bucket scheduler. The running sample total is read as a
// binary number: every 1-bit at position k owns a bucket holding exactly 2^k
// consecutive samples, ranges descending in k as sample ids ascend. Growing
// the total by a task mirrors binary addition: everything at or below the
// most significant flipped bit is rebuilt, everything above is untouched.

namespace logcl {

using SampleId = std::uint64_t;     // 1-based arrival index
using BucketIndex = std::uint32_t;  // bucket k holds 2^k samples

// Closed range [lo, hi] of sample ids; empty iff hi < lo.
struct IdRange {
  SampleId lo = 1;
  SampleId hi = 0;

  bool empty() const { return hi < lo; }
  std::uint64_t count() const { return empty() ? 0 : hi - lo + 1; }
  bool contains(SampleId id) const { return lo <= id && id <= hi; }
  friend bool operator==(const IdRange&, const IdRange&) = default;
};

struct BucketEntry {
  BucketIndex bucket = 0;
  IdRange range;
  friend bool operator==(const BucketEntry&, const BucketEntry&) = default;
};

// Occupied buckets for a given total, ordered by descending bucket index
// (equivalently ascending sample ranges starting at id 1).
struct BucketLayout {
  std::uint64_t total = 0;
  std::vector<BucketEntry> entries;
  friend bool operator==(const BucketLayout&, const BucketLayout&) = default;
};

// One replayed input slice: samples [ids] currently held by `source`.
struct ReplaySlice {
  BucketIndex source = 0;
  IdRange ids;
  friend bool operator==(const ReplaySlice&, const ReplaySlice&) = default;
};

// Rebuild instructions for one target bucket: replayed slices come from
// strictly lower source buckets, `fresh` are ids never seen before.
struct BucketTraining {
  BucketIndex target = 0;
  std::vector<ReplaySlice> replayed;
  IdRange fresh;
  friend bool operator==(const BucketTraining&, const BucketTraining&) = default;

  std::uint64_t replayed_count() const {
    std::uint64_t n = 0;
    for (const auto& s : replayed) n += s.ids.count();
    return n;
  }
  std::uint64_t input_count() const { return replayed_count() + fresh.count(); }
};

// Delta between layout_of(old_total) and layout_of(old_total + task). Targets
// are listed in descending bucket index; only the pivot target may replay.
struct RepackPlan {
  std::uint64_t old_total = 0;
  std::uint64_t new_total = 0;
  BucketIndex pivot = 0;
  std::vector<BucketTraining> trainings;
  std::vector<BucketIndex> untouched;  // descending, all > pivot
  friend bool operator==(const RepackPlan&, const RepackPlan&) = default;
};

struct LayoutVerdict {
  bool valid = true;
  std::string rule;    // "R2" | "R3" | "contiguity" | "coverage" when invalid
  std::string detail;

  explicit operator bool() const { return valid; }
};

// ⌈log₂ n⌉ for n ≥ 1.
std::uint32_t ceil_log2(std::uint64_t n);

// The unique layout for `total` samples (empty layout for 0).
BucketLayout layout_of(std::uint64_t total);

// Index of the most significant bit differing between the two totals.
// Requires old_total < new_total; the bit is 1 in new_total, 0 in old_total.
BucketIndex pivot_bit(std::uint64_t old_total, std::uint64_t new_total);

// Single consolidated repack for one task of `task_size` new samples.
RepackPlan plan_repack(std::uint64_t old_total, std::uint64_t task_size);

// Mechanical check of the layout rules; reports the first violated rule.
LayoutVerdict validate_layout(const BucketLayout& layout);

// ⌈log₂ total⌉ + 1: upper bound on concurrently occupied buckets.
std::uint32_t max_models_bound(std::uint64_t total);

// Number of 1-bits of, i.e. occupied buckets for, `total`.
std::uint32_t occupied_buckets(std::uint64_t total);

}  // namespace logcl
