#include "logcl/ledger.hpp"

#include <cmath>
#include <random>

#include <stdexcept>

#include <doctest.h>

#include "logcl/scheduler.hpp"
#include "oracles.hpp"

using namespace logcl;

namespace {

struct Driver {
  explicit Driver(LedgerOptions opts = {}, double epsilon0 = 0.01, double gamma = 1.5)
      : ledger(opts), backend(epsilon0, gamma), registry(99, 0) {}

  MetricsRow add_task(std::uint64_t size) {
    const auto plan = plan_repack(ledger.total(), size);
    std::vector<FreshSample> fresh;
    fresh.reserve(size);
    for (SampleId id = plan.old_total + 1; id <= plan.new_total; ++id)
      fresh.push_back({id, registry.label(id)});
    return ledger.apply_plan(plan, backend, fresh, registry, memory);
  }

  Ledger ledger;
  AnalyticErrorModel backend;
  OriginalRegistry registry;
  MemoryModel memory;
};

}  // namespace

TEST_CASE("apply_plan tracks the 10 to 13 training example") {
  Driver driver;
  driver.add_task(10);
  for (SampleId id = 1; id <= 10; ++id) CHECK(driver.ledger.replay_count(id) == 0);
  const auto before = driver.ledger.records().record(1);

  const auto row = driver.add_task(3);
  CHECK(driver.ledger.replay_count(9) == 1);
  CHECK(driver.ledger.replay_count(10) == 1);
  CHECK(driver.ledger.records().record(9).bucket == 2);
  for (SampleId id : {11, 12, 13}) CHECK(driver.ledger.replay_count(id) == 0);
  for (SampleId id = 1; id <= 8; ++id) {
    CHECK(driver.ledger.records().record(id).bucket == 3);
    CHECK(driver.ledger.replay_count(id) == 0);
  }
  CHECK(driver.ledger.records().record(1) == before);  // untouched, bit-identical

  CHECK(row.task == 2);
  CHECK(row.total_samples == 13);
  CHECK(row.model_count == 3);
  CHECK(row.retrained_buckets == 2);
  CHECK(row.replayed_samples == 2);
  CHECK(row.fresh_samples == 3);
  CHECK(row.max_replay_count == 1);
  CHECK(driver.ledger.layout() == layout_of(13));
}

TEST_CASE("apply_plan admits an all-fresh start") {
  Driver driver;
  const auto row = driver.add_task(5);
  for (SampleId id = 1; id <= 5; ++id) CHECK(driver.ledger.replay_count(id) == 0);
  CHECK(row.replayed_samples == 0);
  CHECK(row.fresh_samples == 5);
  CHECK(driver.ledger.layout() == layout_of(5));
}

TEST_CASE("apply_plan validates its preconditions") {
  Driver driver;
  driver.add_task(4);

  const auto plan = plan_repack(7, 1);  // ledger holds 4, plan expects 7
  AnalyticErrorModel backend;
  OriginalRegistry registry(99, 0);
  std::vector<FreshSample> fresh{{8, 0}};
  CHECK_THROWS_AS(driver.ledger.apply_plan(plan, backend, fresh, registry, driver.memory),
                  std::invalid_argument);

  const auto good = plan_repack(4, 2);
  std::vector<FreshSample> wrong{{5, 0}};  // missing id 6
  CHECK_THROWS_AS(driver.ledger.apply_plan(good, backend, wrong, registry, driver.memory),
                  std::invalid_argument);
  std::vector<FreshSample> shuffled{{6, 0}, {5, 0}};
  CHECK_THROWS_AS(driver.ledger.apply_plan(good, backend, shuffled, registry, driver.memory),
                  std::invalid_argument);

  CHECK_THROWS_AS(driver.ledger.replay_count(99), std::out_of_range);
  CHECK_THROWS_AS(driver.ledger.retrain_gaps(0), std::out_of_range);
}

TEST_CASE("replay history of sample 1 after tasks (3,1,4) matches the counter oracle") {
  Driver driver;
  testing::CounterOracle oracle;
  for (const std::uint64_t size : {3, 1, 4}) {
    driver.add_task(size);
    oracle.add_task(size);
  }
  CHECK(driver.ledger.retrain_tasks(1) == oracle.history(1));
  CHECK(driver.ledger.replay_count(1) == oracle.count(1));
  CHECK(driver.ledger.replay_count(1) == 2);  // moved at totals 4 and 8
}

TEST_CASE("ledger state matches the sample-by-sample counter oracle") {
  std::mt19937_64 rng(23);
  for (int run = 0; run < 60; ++run) {
    Driver driver;
    testing::CounterOracle oracle;
    const int tasks = 1 + static_cast<int>(rng() % 40);
    for (int t = 0; t < tasks; ++t) {
      const std::uint64_t size = 1 + rng() % 30;

      // Snapshot records of buckets the plan will keep.
      const auto plan = plan_repack(driver.ledger.total(), size);
      std::vector<SampleRecord> untouched_before;
      for (const auto& entry : driver.ledger.layout().entries) {
        bool kept = false;
        for (const auto k : plan.untouched) kept = kept || k == entry.bucket;
        if (!kept) continue;
        for (SampleId id = entry.range.lo; id <= entry.range.hi; ++id)
          untouched_before.push_back(driver.ledger.records().record(id));
      }

      driver.add_task(size);
      oracle.add_task(size);

      CHECK(driver.ledger.layout() == layout_of(oracle.total()));
      for (const auto& before : untouched_before)
        CHECK(driver.ledger.records().record(before.id) == before);

      CHECK(driver.ledger.records().max_replay_count() <=
            (oracle.total() > 1 ? ceil_log2(oracle.total()) : 0));
    }

    for (SampleId id = 1; id <= oracle.total(); ++id) {
      CAPTURE(run);
      CAPTURE(id);
      const auto& rec = driver.ledger.records().record(id);
      CHECK(rec.replay_count == oracle.count(id));
      CHECK(rec.bucket == oracle.bucket(id));
      CHECK(rec.birth_task == oracle.birth(id));
      CHECK(driver.ledger.retrain_tasks(id) == oracle.history(id));
      CHECK(rec.replay_count == driver.ledger.retrain_tasks(id).size());
      CHECK(driver.ledger.retrain_gaps(id) == oracle.gaps(id));
      // Conservation: exactly one bucket range holds this id.
      int holders = 0;
      for (const auto& entry : driver.ledger.layout().entries)
        holders += entry.range.contains(id) ? 1 : 0;
      CHECK(holders == 1);
    }
  }
}

TEST_CASE("single-sample tasks give sample 1 its power-of-two gaps") {
  Driver driver;
  for (int t = 0; t < 64; ++t) driver.add_task(1);
  CHECK(driver.ledger.retrain_gaps(1) == std::vector<std::uint32_t>{1, 2, 4, 8, 16, 32});
  CHECK(driver.ledger.replay_count(1) == 6);

  for (int t = 64; t < 127; ++t) driver.add_task(1);
  CHECK(driver.ledger.replay_count(1) == 6);  // next move would come at 128
  CHECK(driver.ledger.retrain_gaps(127).empty());
}

TEST_CASE("retrain gaps never shrink under equal task sizes") {
  std::mt19937_64 rng(31);
  for (int run = 0; run < 40; ++run) {
    Driver driver;
    const std::uint64_t size = 1 + rng() % 40;
    const int tasks = 2 + static_cast<int>(rng() % 80);
    for (int t = 0; t < tasks; ++t) driver.add_task(size);
    for (SampleId id = 1; id <= driver.ledger.total(); ++id) {
      const auto gaps = driver.ledger.retrain_gaps(id);
      for (std::size_t i = 1; i < gaps.size(); ++i) {
        CAPTURE(size);
        CAPTURE(id);
        CHECK(gaps[i - 1] <= gaps[i]);
      }
    }
  }
}

TEST_CASE("history can be disabled for bulk runs") {
  Driver driver(LedgerOptions{.track_history = false, .compute_error_stats = false});
  for (int t = 0; t < 20; ++t) driver.add_task(3);
  CHECK(driver.ledger.replay_count(1) > 0);
  CHECK_THROWS_AS(driver.ledger.retrain_tasks(1), std::logic_error);
  CHECK_THROWS_AS(driver.ledger.retrain_gaps(1), std::logic_error);
}

TEST_CASE("error histogram separates exact degradation levels") {
  Driver driver;
  testing::CounterOracle oracle;
  for (int t = 0; t < 100; ++t) {
    driver.add_task(1);
    oracle.add_task(1);
  }

  // Edges at geometric midpoints isolate each level epsilon0 * gamma^c.
  std::vector<double> edges;
  for (int c = 0; c <= 8; ++c) edges.push_back(0.01 * std::pow(1.5, c - 0.5));
  const auto hist = driver.ledger.error_histogram(edges);
  REQUIRE_FALSE(hist.empty);

  std::vector<std::uint64_t> level_counts(9, 0);
  for (SampleId id = 1; id <= 100; ++id) ++level_counts[oracle.count(id)];
  for (int c = 0; c < 8; ++c) {
    CHECK(hist.bin_mass[c] == doctest::Approx(level_counts[c] / 100.0).epsilon(1e-12));
  }
  CHECK(hist.zero_mass == 0.0);
  CHECK(hist.underflow == 0.0);
  CHECK(hist.overflow == 0.0);
}

TEST_CASE("error histogram flags the empty ledger and puts zeros in the zero bin") {
  RecordTable empty_table;
  const std::vector<double> edges{0.1, 1.0};
  CHECK(empty_table.error_histogram(edges).empty);

  RecordTable zeros;
  for (SampleId id = 1; id <= 5; ++id) zeros.append_fresh(id, 0, 0, 1);
  const auto hist = zeros.error_histogram(edges);
  CHECK_FALSE(hist.empty);
  CHECK(hist.zero_mass == 1.0);

  const std::vector<double> bad_edges{1.0, 0.1};
  CHECK_THROWS_AS(zeros.error_histogram(bad_edges), std::invalid_argument);
}

TEST_CASE("percentile helper uses nearest rank") {
  std::vector<double> values;
  for (int i = 1; i <= 100; ++i) values.push_back(i);
  CHECK(percentile_nearest_rank(values, 95.0) == 95.0);
  std::vector<double> single{3.5};
  CHECK(percentile_nearest_rank(single, 95.0) == 3.5);
  std::vector<double> three{30.0, 10.0, 20.0};
  CHECK(percentile_nearest_rank(three, 50.0) == 20.0);
  std::vector<double> none;
  CHECK(percentile_nearest_rank(none, 95.0) == 0.0);
  CHECK(mean_of({}) == 0.0);
}
