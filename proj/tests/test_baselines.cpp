#include "logcl/baselines.hpp"

#include <cmath>

#include <stdexcept>

#include <doctest.h>

#include "logcl/volume.hpp"

using namespace logcl;

namespace {

std::vector<FreshSample> next_batch(const OriginalRegistry& registry, SampleId& next,
                                    std::uint64_t size) {
  std::vector<FreshSample> batch;
  for (std::uint64_t i = 0; i < size; ++i, ++next) batch.push_back({next, registry.label(next)});
  return batch;
}

}  // namespace

TEST_CASE("single replay retrains everything every task") {
  auto registry = std::make_shared<OriginalRegistry>(5, 0);
  auto backend = std::make_shared<AnalyticErrorModel>(0.01, 1.5);
  SingleReplaySystem system(backend, registry, MemoryModel{1.0, 0.01});

  SampleId next = 1;
  MetricsRow row = system.step(next_batch(*registry, next, 3));
  CHECK(row.max_replay_count == 0);
  CHECK(row.replayed_samples == 0);

  for (int task = 2; task <= 10; ++task) {
    row = system.step(next_batch(*registry, next, 3));
    CHECK(row.model_count == 1);
    CHECK(row.memory_units == 1.0);
    CHECK(row.retrained_buckets == 1);
    CHECK(row.replayed_samples + row.fresh_samples == row.total_samples);
  }

  // Born in task b, replayed once per later task: count = T - b.
  for (SampleId id = 1; id <= system.total_samples(); ++id) {
    const std::uint32_t born = system.records().record(id).birth_task;
    CHECK(system.records().replay_count(id) == 10 - born);
  }
  const double expected = 0.01 * std::pow(1.5, 9);
  CHECK(system.records().record(1).error == doctest::Approx(expected).epsilon(1e-12));
  CHECK(row.max_replay_count == 9);
}

TEST_CASE("buffer stores verbatim with linear memory and zero error") {
  const MemoryModel memory{1.0, 0.01};
  auto registry = std::make_shared<OriginalRegistry>(5, 0);
  BufferSystem system(memory);

  SampleId next = 1;
  MetricsRow row;
  for (int task = 1; task <= 12; ++task) row = system.step(next_batch(*registry, next, 64));

  CHECK(row.total_samples == 12 * 64);
  CHECK(row.memory_units == static_cast<double>(12 * 64) * memory.per_sample_raw);
  CHECK(row.max_replay_count == 0);
  CHECK(row.replayed_samples == 0);
  CHECK(row.mean_error == 0.0);

  const std::vector<double> edges{0.001, 0.01, 0.1};
  const auto hist = system.error_histogram(edges);
  CHECK(hist.zero_mass == 1.0);
  CHECK(hist.underflow == 0.0);
  CHECK(hist.overflow == 0.0);

  BufferSystem one(memory);
  SampleId id = 1;
  const auto first = one.step(next_batch(*registry, id, 1));
  CHECK(first.memory_units == memory.per_sample_raw);
}

TEST_CASE("scheduler dominates single replay once buckets go untouched") {
  auto registry = std::make_shared<OriginalRegistry>(5, 0);
  const MemoryModel memory{1.0, 0.01};

  LogClSystem scheduler(1, std::make_shared<AnalyticErrorModel>(0.01, 1.5), registry, memory);
  SingleReplaySystem single(std::make_shared<AnalyticErrorModel>(0.01, 1.5), registry, memory);

  SampleId next_a = 1;
  SampleId next_b = 1;
  bool untouched_seen = false;
  for (int task = 1; task <= 30; ++task) {
    const auto plan = plan_repack(scheduler.ledger().total(), 4);
    untouched_seen = untouched_seen || !plan.untouched.empty();

    const auto row_a = scheduler.step(next_batch(*registry, next_a, 4));
    const auto row_b = single.step(next_batch(*registry, next_b, 4));

    CHECK(row_a.mean_error <= row_b.mean_error);
    if (untouched_seen) CHECK(row_a.mean_error < row_b.mean_error);
    CHECK(row_b.max_replay_count == task - 1);
    CHECK(row_a.max_replay_count <= ceil_log2(row_a.total_samples));
  }
}
