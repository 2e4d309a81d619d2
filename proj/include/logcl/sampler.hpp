#pragma once

#include <cstdint>
#include <vector>

#include "logcl/backends.hpp"
#include "logcl/ledger.hpp"
#include "logcl/scheduler.hpp"

// Rehearsal stream for downstream (global-model) consumers: draw sample ids
// uniformly over everything seen so far, reconstruct each from its bucket's
// store, and add white-noise augmentation so bucket-specific artifacts cannot
// leak into the labels.

namespace logcl {

struct RehearsalItem {
  SampleId id = 0;
  BucketIndex bucket = 0;
  std::vector<double> payload;  // reconstruction + augmentation noise
  Label label = 0;
  double error = 0.0;
};

// Bucket whose range contains `id`; binary search over the layout entries.
BucketIndex locate_bucket(const BucketLayout& layout, SampleId id);

// `draws` items with ids ~ U{1..layout.total}. Deterministic in `seed`.
// Requires a trained store for every occupied bucket.
std::vector<RehearsalItem> sample_rehearsal_stream(const BucketLayout& layout,
                                                   const BucketStores& stores, std::uint64_t draws,
                                                   double sigma_aug, std::uint64_t seed);

}  // namespace logcl
