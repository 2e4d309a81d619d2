#include "logcl/sampler.hpp"

#include <algorithm>
#include <stdexcept>

#include "logcl/rng.hpp"

namespace logcl {

BucketIndex locate_bucket(const BucketLayout& layout, SampleId id) {
  if (id == 0 || id > layout.total)
    throw std::out_of_range("locate_bucket: id " + std::to_string(id) + " not in [1, " +
                            std::to_string(layout.total) + "]");
  // Entries are ordered by ascending ranges; find the first range ending at
  // or after id.
  const auto it = std::partition_point(layout.entries.begin(), layout.entries.end(),
                                       [&](const BucketEntry& e) { return e.range.hi < id; });
  if (it == layout.entries.end() || !it->range.contains(id))
    throw std::logic_error("locate_bucket: layout does not cover id " + std::to_string(id));
  return it->bucket;
}

std::vector<RehearsalItem> sample_rehearsal_stream(const BucketLayout& layout,
                                                   const BucketStores& stores, std::uint64_t draws,
                                                   double sigma_aug, std::uint64_t seed) {
  if (draws == 0) throw std::invalid_argument("sample_rehearsal_stream: draws must be >= 1");
  if (layout.total == 0) throw std::invalid_argument("sample_rehearsal_stream: empty layout");
  for (const auto& e : layout.entries) {
    if (!stores.find(e.bucket))
      throw std::out_of_range("sample_rehearsal_stream: no trained store for occupied bucket " +
                              std::to_string(e.bucket));
  }

  // Separate id and noise streams: augmentation strength never changes which
  // samples get drawn.
  Rng id_rng = Rng(seed).fork(1);
  Rng noise_rng = Rng(seed).fork(2);
  std::vector<RehearsalItem> items;
  items.reserve(draws);
  for (std::uint64_t i = 0; i < draws; ++i) {
    const SampleId id = 1 + id_rng.below(layout.total);
    const BucketIndex bucket = locate_bucket(layout, id);
    auto rec = stores.at(bucket).reconstruct(id);
    if (sigma_aug > 0.0) {
      for (double& v : rec.payload) v += noise_rng.normal(sigma_aug);
    }
    items.push_back({id, bucket, std::move(rec.payload), rec.label, rec.error});
  }
  return items;
}

}  // namespace logcl
