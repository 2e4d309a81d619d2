#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "logcl/rng.hpp"
#include "logcl/scheduler.hpp"

// Pluggable "local model" stores. A backend turns a batch of
// (id, payload, label) triples into an immutable trained instance that can
// reconstruct each trained id together with a nonnegative degradation error.

namespace logcl {

using Label = std::int64_t;

// A sample entering some system for the first time.
struct FreshSample {
  SampleId id = 0;
  Label label = 0;
  friend bool operator==(const FreshSample&, const FreshSample&) = default;
};

// One training input. `payload` is the value as fed in (a reconstruction for
// replayed samples, the pristine value for fresh ones; empty for payload-free
// backends). `replay_count` is the sample's count after this training.
struct TrainingExample {
  SampleId id = 0;
  Label label = 0;
  std::uint32_t replay_count = 0;
  std::vector<double> payload;
};

struct StoredSample {
  SampleId id = 0;
  Label label = 0;
  double error = 0.0;
};

struct Reconstruction {
  std::vector<double> payload;
  Label label = 0;
  double error = 0.0;
};

// Immutable after training. reconstruct is defined exactly for the trained
// ids; contents() lists them in training order for bulk consumers.
class TrainedModel {
 public:
  virtual ~TrainedModel() = default;
  virtual Reconstruction reconstruct(SampleId id) const = 0;
  virtual const std::vector<StoredSample>& contents() const = 0;
  virtual std::uint32_t payload_dim() const = 0;  // 0 when reconstructions carry no values
};

class LocalModelBackend {
 public:
  virtual ~LocalModelBackend() = default;
  virtual std::shared_ptr<const TrainedModel> train(const std::vector<TrainingExample>& batch) = 0;
};

// Pristine synthetic data stream: payload and label per sample id, generated
// deterministically from the seed. Doubles as the measurement registry the
// lossy store compares against. dim 0 produces empty payloads.
class OriginalRegistry {
 public:
  OriginalRegistry(std::uint64_t seed, std::uint32_t dim, std::uint32_t classes = 300);

  std::vector<double> payload(SampleId id) const;
  std::span<const double> payload_view(SampleId id) const;  // arena-backed
  Label label(SampleId id) const;
  std::uint32_t dim() const { return dim_; }
  std::uint32_t classes() const { return classes_; }

 private:
  void ensure(SampleId id) const;

  std::uint64_t seed_;
  std::uint32_t dim_;
  std::uint32_t classes_;
  mutable std::vector<double> arena_;  // payloads for ids 1..generated_, flat
  mutable SampleId generated_ = 0;
};

// Stores each input plus fresh zero-mean Gaussian noise (stddev sigma_train
// per dimension) drawn at train time. The error scalar is the RMS distance of
// the stored value to the pristine original, so replay chains accumulate
// noise as a random walk: per-dimension MSE grows like (c+1)·sigma^2.
class NoisyLossyStore final : public LocalModelBackend {
 public:
  NoisyLossyStore(double sigma_train, std::uint64_t seed,
                  std::shared_ptr<const OriginalRegistry> originals);

  std::shared_ptr<const TrainedModel> train(const std::vector<TrainingExample>& batch) override;

 private:
  double sigma_;
  Rng rng_;
  std::shared_ptr<const OriginalRegistry> originals_;
};

// Closed-form degradation without materialized payloads: a sample replayed c
// times carries error base_error * growth^c exactly.
class AnalyticErrorModel final : public LocalModelBackend {
 public:
  explicit AnalyticErrorModel(double base_error = 0.01, double growth = 1.5);

  std::shared_ptr<const TrainedModel> train(const std::vector<TrainingExample>& batch) override;

  double error_at(std::uint32_t replay_count) const;
  double base_error() const { return base_error_; }
  double growth() const { return growth_; }

 private:
  double base_error_;
  double growth_;
  mutable std::vector<double> powers_;  // growth^c
};

// Abstract-unit memory accounting. The largest bucket costs s_max; bucket j
// under largest index K costs s_max * ((7/8) * 2^(j-K) + 1/8). Raw storage
// (the buffer baseline and side buffers) costs per_sample_raw per sample.
struct MemoryModel {
  double s_max = 1.0;
  double per_sample_raw = 0.01;
};

double bucket_size(BucketIndex j, BucketIndex k_max, const MemoryModel& model);
double total_memory(const BucketLayout& layout, const MemoryModel& model);

}  // namespace logcl
