#include "logcl/volume.hpp"

#include <random>

#include <stdexcept>

#include <doctest.h>

#include "logcl/sampler.hpp"
#include "logcl/scheduler.hpp"

using namespace logcl;

namespace {

std::vector<FreshSample> ids(SampleId first, SampleId last) {
  std::vector<FreshSample> batch;
  for (SampleId id = first; id <= last; ++id) batch.push_back({id, static_cast<Label>(id % 7)});
  return batch;
}

}  // namespace

TEST_CASE("ingest buffers below the unit size") {
  ScaledCounter counter(4);
  const auto result = counter.ingest(ids(1, 3));
  CHECK(result.unit_plans.empty());
  CHECK(result.flushed.empty());
  CHECK(counter.flushed_units() == 0);
  CHECK(counter.side_buffer().size() == 3);
  CHECK(counter.total_samples() == 3);
}

TEST_CASE("ingest flushes all complete units as one plan") {
  ScaledCounter counter(4);
  counter.ingest(ids(1, 3));
  const auto result = counter.ingest(ids(4, 9));  // 9 pending = 2 units + 1

  REQUIRE(result.unit_plans.size() == 1);
  CHECK(result.unit_plans[0] == plan_repack(0, 2));
  CHECK(result.flushed == ids(1, 8));
  CHECK(counter.flushed_units() == 2);
  CHECK(counter.side_buffer().size() == 1);
  CHECK(counter.side_buffer()[0].id == 9);
  CHECK(counter.total_samples() == 9);

  CHECK_THROWS_AS(counter.ingest({}), std::invalid_argument);
  CHECK_THROWS_AS(counter.ingest(ids(11, 11)), std::invalid_argument);  // id 10 skipped
  CHECK_THROWS_AS(ScaledCounter(0), std::invalid_argument);
}

TEST_CASE("scale_plan expands unit ranges to sample ranges") {
  const auto unit_plan = plan_repack(2, 1);  // units: pivot 0, fresh unit {3}
  const auto plan = scale_plan(unit_plan, 4);
  CHECK(plan.old_total == 8);
  CHECK(plan.new_total == 12);
  CHECK(plan.pivot == unit_plan.pivot);
  REQUIRE(plan.trainings.size() == 1);
  CHECK(plan.trainings[0].fresh == IdRange{9, 12});
  CHECK(plan.trainings[0].input_count() == 4);  // L * 2^0

  const auto carry = scale_plan(plan_repack(1, 1), 4);
  REQUIRE(carry.trainings.size() == 1);
  REQUIRE(carry.trainings[0].replayed.size() == 1);
  CHECK(carry.trainings[0].replayed[0].ids == IdRange{1, 4});
  CHECK(carry.trainings[0].fresh == IdRange{5, 8});
  CHECK_THROWS_AS(scale_plan(unit_plan, 0), std::invalid_argument);
}

TEST_CASE("unit 1 reduces bit-identically to the base scheduler") {
  std::mt19937_64 rng(47);
  for (int run = 0; run < 40; ++run) {
    auto registry = std::make_shared<OriginalRegistry>(run, 0);
    const MemoryModel memory{1.0, 0.01};

    LogClSystem scaled(1, std::make_shared<AnalyticErrorModel>(0.01, 1.5), registry, memory);
    Ledger base;
    AnalyticErrorModel base_backend(0.01, 1.5);

    const int tasks = 1 + static_cast<int>(rng() % 30);
    SampleId next = 1;
    for (int t = 0; t < tasks; ++t) {
      const std::uint64_t size = 1 + rng() % 50;
      std::vector<FreshSample> batch;
      for (std::uint64_t i = 0; i < size; ++i, ++next)
        batch.push_back({next, registry->label(next)});

      const auto scaled_row = scaled.step(batch);
      const auto plan = plan_repack(base.total(), size);
      const auto base_row = base.apply_plan(plan, base_backend, batch, *registry, memory);

      CHECK(scaled_row.total_samples == base_row.total_samples);
      CHECK(scaled_row.memory_units == base_row.memory_units);
      CHECK(scaled_row.replayed_samples == base_row.replayed_samples);
      CHECK(scaled_row.fresh_samples == base_row.fresh_samples);
      CHECK(scaled_row.mean_error == base_row.mean_error);
      CHECK(scaled_row.p95_error == base_row.p95_error);
    }
    CHECK(scaled.ledger().layout() == base.layout());
    CHECK(scaled.ledger().records() == base.records());
    CHECK(scaled.counter().side_buffer().empty());
  }
}

TEST_CASE("scaled system keeps the unit-space replay bound") {
  std::mt19937_64 rng(53);
  auto registry = std::make_shared<OriginalRegistry>(9, 0);
  LogClSystem system(4, std::make_shared<AnalyticErrorModel>(), registry, MemoryModel{});

  SampleId next = 1;
  for (int t = 0; t < 60; ++t) {
    const std::uint64_t size = 1 + rng() % 9;
    std::vector<FreshSample> batch;
    for (std::uint64_t i = 0; i < size; ++i, ++next) batch.push_back({next, 0});
    system.step(batch);

    CHECK(system.counter().side_buffer().size() <= 3);
    const auto units = system.counter().flushed_units();
    if (units > 1)
      CHECK(system.ledger().records().max_replay_count() <= ceil_log2(units));

    // Ledger layout equals layout_of(units) with every unit range scaled.
    const auto unit_layout = layout_of(units);
    const auto& layout = system.ledger().layout();
    REQUIRE(layout.entries.size() == unit_layout.entries.size());
    for (std::size_t i = 0; i < layout.entries.size(); ++i) {
      CHECK(layout.entries[i].bucket == unit_layout.entries[i].bucket);
      CHECK(layout.entries[i].range.lo == (unit_layout.entries[i].range.lo - 1) * 4 + 1);
      CHECK(layout.entries[i].range.hi == unit_layout.entries[i].range.hi * 4);
    }
  }
}

TEST_CASE("rehearsal streams draw from scaled layouts") {
  auto registry = std::make_shared<OriginalRegistry>(6, 0);
  LogClSystem system(4, std::make_shared<AnalyticErrorModel>(), registry, MemoryModel{});
  system.step(ids(1, 30));  // 7 units flushed, 2 buffered

  const auto stream = sample_rehearsal_stream(system.ledger().layout(),
                                              system.ledger().stores(), 500, 0.0, 77);
  for (const auto& item : stream) {
    CHECK(item.id >= 1);
    CHECK(item.id <= 28);  // flushed ids only; the side buffer is raw
    CHECK(item.bucket == locate_bucket(system.ledger().layout(), item.id));
  }
}

TEST_CASE("buffered samples cost raw memory and carry zero error") {
  auto registry = std::make_shared<OriginalRegistry>(9, 0);
  const MemoryModel memory{1.0, 0.25};
  LogClSystem system(4, std::make_shared<AnalyticErrorModel>(0.5, 2.0), registry, memory);

  auto row = system.step(ids(1, 3));  // nothing flushed yet
  CHECK(row.total_samples == 3);
  CHECK(row.model_count == 0);
  CHECK(row.memory_units == 3 * 0.25);
  CHECK(row.fresh_samples == 0);
  CHECK(row.mean_error == 0.0);

  row = system.step(ids(4, 9));  // two units flush, one sample stays raw
  CHECK(row.total_samples == 9);
  CHECK(row.fresh_samples == 8);
  CHECK(row.memory_units == total_memory(system.ledger().layout(), memory) + 0.25);
  // 8 trained samples at base error 0.5 plus one raw zero.
  CHECK(row.mean_error == doctest::Approx(8 * 0.5 / 9.0));

  const std::vector<double> edges{0.1, 1.0};
  const auto hist = system.error_histogram(edges);
  CHECK(hist.zero_mass == doctest::Approx(1.0 / 9.0));
  CHECK(hist.bin_mass[0] == doctest::Approx(8.0 / 9.0));
}
