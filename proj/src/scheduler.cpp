#include "logcl/scheduler.hpp"

#include <bit>
#include <stdexcept>

namespace logcl {

std::uint32_t ceil_log2(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("ceil_log2: n must be >= 1");
  if (n == 1) return 0;
  return static_cast<std::uint32_t>(std::bit_width(n - 1));
}

std::uint32_t occupied_buckets(std::uint64_t total) {
  return static_cast<std::uint32_t>(std::popcount(total));
}

BucketLayout layout_of(std::uint64_t total) {
  BucketLayout layout;
  layout.total = total;
  if (total == 0) return layout;
  layout.entries.reserve(occupied_buckets(total));
  SampleId next = 1;
  for (int k = std::bit_width(total) - 1; k >= 0; --k) {
    const std::uint64_t cap = std::uint64_t{1} << k;
    if ((total & cap) == 0) continue;
    layout.entries.push_back({static_cast<BucketIndex>(k), {next, next + cap - 1}});
    next += cap;
  }
  return layout;
}

BucketIndex pivot_bit(std::uint64_t old_total, std::uint64_t new_total) {
  if (old_total >= new_total)
    throw std::invalid_argument("pivot_bit: totals may only grow (old=" +
                                std::to_string(old_total) + ", new=" + std::to_string(new_total) + ")");
  return static_cast<BucketIndex>(std::bit_width(old_total ^ new_total) - 1);
}

RepackPlan plan_repack(std::uint64_t old_total, std::uint64_t task_size) {
  if (task_size == 0) throw std::invalid_argument("plan_repack: task_size must be >= 1");

  RepackPlan plan;
  plan.old_total = old_total;
  plan.new_total = old_total + task_size;
  plan.pivot = pivot_bit(old_total, plan.new_total);

  // Buckets above the pivot keep their bits, hence their exact ranges.
  for (int k = old_total == 0 ? -1 : std::bit_width(old_total) - 1;
       k > static_cast<int>(plan.pivot); --k) {
    if (old_total & (std::uint64_t{1} << k)) plan.untouched.push_back(static_cast<BucketIndex>(k));
  }

  // Everything at or below the pivot is rebuilt. `prefix` is the sample count
  // retained by the untouched buckets. 2<<pivot stays defined at pivot 63.
  const std::uint64_t low_mask = (std::uint64_t{2} << plan.pivot) - 1;
  const std::uint64_t prefix = old_total & ~low_mask;

  // The pivot target sweeps all old samples below it (sources strictly
  // smaller), then tops up with fresh ids; lower targets are fresh-only.
  SampleId next = prefix + 1;
  for (int k = static_cast<int>(plan.pivot); k >= 0; --k) {
    const std::uint64_t cap = std::uint64_t{1} << k;
    if ((plan.new_total & cap) == 0) continue;
    BucketTraining training;
    training.target = static_cast<BucketIndex>(k);
    SampleId end = next + cap - 1;
    if (k == static_cast<int>(plan.pivot)) {
      const std::uint64_t swept = old_total & low_mask;  // old samples below the pivot
      for (std::uint32_t bit = plan.pivot; bit-- > 0;) {
        const std::uint64_t src_cap = std::uint64_t{1} << bit;
        if ((swept & src_cap) == 0) continue;
        training.replayed.push_back({static_cast<BucketIndex>(bit), {next, next + src_cap - 1}});
        next += src_cap;
      }
      end = prefix + cap;  // replays plus fresh fill the full capacity
    }
    training.fresh = {next, end};
    next = end + 1;
    plan.trainings.push_back(std::move(training));
  }
  return plan;
}

LayoutVerdict validate_layout(const BucketLayout& layout) {
  // R2: each occupied bucket holds exactly 2^k samples.
  for (const auto& e : layout.entries) {
    const std::uint64_t cap = std::uint64_t{1} << e.bucket;
    if (e.range.count() != cap) {
      return {false, "R2",
              "bucket " + std::to_string(e.bucket) + " holds " + std::to_string(e.range.count()) +
                  " samples, expected " + std::to_string(cap)};
    }
  }
  // R3: bucket index nonincreasing as sample ids grow (strict here; equal
  // indices cannot both satisfy R2 and are caught below).
  for (std::size_t i = 1; i < layout.entries.size(); ++i) {
    if (layout.entries[i].bucket > layout.entries[i - 1].bucket) {
      return {false, "R3",
              "bucket index rises from " + std::to_string(layout.entries[i - 1].bucket) + " to " +
                  std::to_string(layout.entries[i].bucket)};
    }
  }
  // Contiguity: ranges abut and start at id 1.
  SampleId expect = 1;
  for (const auto& e : layout.entries) {
    if (e.range.lo != expect) {
      return {false, "contiguity",
              "range starts at " + std::to_string(e.range.lo) + ", expected " + std::to_string(expect)};
    }
    expect = e.range.hi + 1;
  }
  // Coverage: ranges end exactly at `total`.
  if (expect != layout.total + 1) {
    return {false, "coverage",
            "ranges cover [1, " + std::to_string(expect - 1) + "], total is " +
                std::to_string(layout.total)};
  }
  // Occupied set must equal the 1-bits of total (rejects duplicate indices).
  std::uint64_t occupied = 0;
  for (const auto& e : layout.entries) {
    const std::uint64_t bit = std::uint64_t{1} << e.bucket;
    if (occupied & bit) {
      return {false, "R2", "bucket " + std::to_string(e.bucket) + " appears twice"};
    }
    occupied |= bit;
  }
  if (occupied != layout.total) {
    return {false, "R2", "occupied buckets do not match the binary notation of the total"};
  }
  return {};
}

std::uint32_t max_models_bound(std::uint64_t total) {
  if (total == 0) throw std::invalid_argument("max_models_bound: total must be >= 1");
  return ceil_log2(total) + 1;
}

}  // namespace logcl
