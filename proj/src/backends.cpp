#include "logcl/backends.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace logcl {

namespace {

// Shared lookup for both concrete stores: contents in training order with a
// constant-time path for the usual case of one consecutive id run.
class StoreBase : public TrainedModel {
 public:
  const std::vector<StoredSample>& contents() const override { return contents_; }

 protected:
  void finish_index() {
    consecutive_ = true;
    for (std::size_t i = 1; i < contents_.size(); ++i)
      consecutive_ = consecutive_ && contents_[i].id == contents_[i - 1].id + 1;
    if (consecutive_) return;
    index_.resize(contents_.size());
    for (std::size_t i = 0; i < contents_.size(); ++i) index_[i] = {contents_[i].id, i};
    std::sort(index_.begin(), index_.end());
  }

  std::size_t position_of(SampleId id) const {
    if (consecutive_) {
      if (contents_.empty() || id < contents_.front().id || id > contents_.back().id)
        throw std::out_of_range("reconstruct: sample " + std::to_string(id) +
                                " was not in the training batch");
      return id - contents_.front().id;
    }
    const auto it = std::lower_bound(index_.begin(), index_.end(),
                                     std::pair<SampleId, std::size_t>{id, 0});
    if (it == index_.end() || it->first != id)
      throw std::out_of_range("reconstruct: sample " + std::to_string(id) +
                              " was not in the training batch");
    return it->second;
  }

  std::vector<StoredSample> contents_;

 private:
  std::vector<std::pair<SampleId, std::size_t>> index_;
  bool consecutive_ = false;
};

class NoisyTrainedModel final : public StoreBase {
 public:
  NoisyTrainedModel(const std::vector<TrainingExample>& batch, double sigma, Rng rng,
                    const OriginalRegistry& originals) {
    const std::uint32_t dim = originals.dim();
    if (dim == 0)
      throw std::invalid_argument("NoisyLossyStore: registry payload dimension must be >= 1");
    contents_.reserve(batch.size());
    values_.reserve(batch.size() * dim);
    for (const auto& ex : batch) {
      if (ex.payload.size() != dim)
        throw std::invalid_argument("NoisyLossyStore: payload dimension mismatch for sample " +
                                    std::to_string(ex.id));
      const auto pristine = originals.payload_view(ex.id);
      double sq = 0.0;
      for (std::uint32_t d = 0; d < dim; ++d) {
        const double stored = ex.payload[d] + (sigma > 0.0 ? rng.normal(sigma) : 0.0);
        values_.push_back(stored);
        const double diff = stored - pristine[d];
        sq += diff * diff;
      }
      contents_.push_back({ex.id, ex.label, std::sqrt(sq / dim)});
    }
    dim_ = dim;
    finish_index();
  }

  Reconstruction reconstruct(SampleId id) const override {
    const std::size_t pos = position_of(id);
    const auto begin = values_.begin() + static_cast<std::ptrdiff_t>(pos * dim_);
    return {std::vector<double>(begin, begin + dim_), contents_[pos].label, contents_[pos].error};
  }

  std::uint32_t payload_dim() const override { return dim_; }

 private:
  std::vector<double> values_;
  std::uint32_t dim_ = 0;
};

class AnalyticTrainedModel final : public StoreBase {
 public:
  AnalyticTrainedModel(const std::vector<TrainingExample>& batch, const AnalyticErrorModel& model) {
    contents_.reserve(batch.size());
    for (const auto& ex : batch)
      contents_.push_back({ex.id, ex.label, model.error_at(ex.replay_count)});
    finish_index();
  }

  Reconstruction reconstruct(SampleId id) const override {
    const std::size_t pos = position_of(id);
    return {{}, contents_[pos].label, contents_[pos].error};
  }

  std::uint32_t payload_dim() const override { return 0; }
};

}  // namespace

OriginalRegistry::OriginalRegistry(std::uint64_t seed, std::uint32_t dim, std::uint32_t classes)
    : seed_(seed), dim_(dim), classes_(classes) {
  if (classes_ == 0) throw std::invalid_argument("OriginalRegistry: classes must be >= 1");
}

void OriginalRegistry::ensure(SampleId id) const {
  if (id == 0) throw std::out_of_range("OriginalRegistry: ids are 1-based");
  if (dim_ == 0) return;  // payload-free registry
  while (generated_ < id) {
    ++generated_;
    Rng rng(splitmix64(seed_ ^ splitmix64(generated_)));
    for (std::uint32_t d = 0; d < dim_; ++d) arena_.push_back(rng.normal(1.0));
  }
}

std::span<const double> OriginalRegistry::payload_view(SampleId id) const {
  ensure(id);
  return {arena_.data() + (id - 1) * dim_, dim_};
}

std::vector<double> OriginalRegistry::payload(SampleId id) const {
  const auto view = payload_view(id);
  return {view.begin(), view.end()};
}

Label OriginalRegistry::label(SampleId id) const {
  if (id == 0) throw std::out_of_range("OriginalRegistry: ids are 1-based");
  return static_cast<Label>((id - 1) % classes_);
}

NoisyLossyStore::NoisyLossyStore(double sigma_train, std::uint64_t seed,
                                 std::shared_ptr<const OriginalRegistry> originals)
    : sigma_(sigma_train), rng_(seed), originals_(std::move(originals)) {
  if (sigma_ < 0.0) throw std::invalid_argument("NoisyLossyStore: sigma_train must be >= 0");
  if (!originals_) throw std::invalid_argument("NoisyLossyStore: originals registry is required");
}

std::shared_ptr<const TrainedModel> NoisyLossyStore::train(const std::vector<TrainingExample>& batch) {
  if (batch.empty()) throw std::invalid_argument("NoisyLossyStore: training batch is empty");
  // Each training draws from a forked child stream so the stored state is a
  // function of (seed, call ordinal, batch) alone.
  return std::make_shared<NoisyTrainedModel>(batch, sigma_, rng_.fork(rng_.next_u64()), *originals_);
}

AnalyticErrorModel::AnalyticErrorModel(double base_error, double growth)
    : base_error_(base_error), growth_(growth) {
  if (base_error_ <= 0.0) throw std::invalid_argument("AnalyticErrorModel: base_error must be > 0");
  if (growth_ < 1.0) throw std::invalid_argument("AnalyticErrorModel: growth must be >= 1");
  powers_.push_back(1.0);
}

double AnalyticErrorModel::error_at(std::uint32_t replay_count) const {
  while (powers_.size() <= replay_count) powers_.push_back(powers_.back() * growth_);
  return base_error_ * powers_[replay_count];
}

std::shared_ptr<const TrainedModel> AnalyticErrorModel::train(const std::vector<TrainingExample>& batch) {
  if (batch.empty()) throw std::invalid_argument("AnalyticErrorModel: training batch is empty");
  return std::make_shared<AnalyticTrainedModel>(batch, *this);
}

double bucket_size(BucketIndex j, BucketIndex k_max, const MemoryModel& model) {
  if (j > k_max)
    throw std::invalid_argument("bucket_size: bucket " + std::to_string(j) +
                                " exceeds largest index " + std::to_string(k_max));
  // (7/8)·2^(j-K) + 1/8, exact in binary arithmetic.
  return model.s_max * (std::ldexp(0.875, static_cast<int>(j) - static_cast<int>(k_max)) + 0.125);
}

double total_memory(const BucketLayout& layout, const MemoryModel& model) {
  if (layout.entries.empty()) return 0.0;
  const BucketIndex k_max = layout.entries.front().bucket;
  double sum = 0.0;
  for (const auto& e : layout.entries) sum += bucket_size(e.bucket, k_max, model);
  return sum;
}

}  // namespace logcl
