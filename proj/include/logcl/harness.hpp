#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "logcl/backends.hpp"
#include "logcl/ledger.hpp"
#include "logcl/scheduler.hpp"

// Scenario-driven front end: parse a config, run the requested systems over
// the task sequence, and emit byte-stable CSV/JSON artifacts.

namespace logcl {

enum class SystemKind { logcl, single_replay, buffer };
enum class BackendKind { analytic, noisy };

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Scenario {
  std::string name;
  std::vector<std::uint64_t> task_sizes;
  BackendKind backend = BackendKind::analytic;
  double epsilon0 = 0.01;      // analytic base error
  double gamma = 1.5;          // analytic growth factor
  double sigma_train = 0.05;   // noisy per-training stddev
  std::uint32_t dim = 32;      // payload dimension (0 allowed for analytic)
  MemoryModel memory;
  std::uint32_t volume_unit = 1;  // L
  std::uint64_t rehearsal_draws = 0;
  double sigma_aug = 0.05;
  std::vector<double> histogram_edges;
  std::uint64_t seed = 0;
  std::uint32_t classes = 300;
  std::vector<SystemKind> systems;
};

std::string_view system_name(SystemKind kind);

// Parsing throws ConfigError naming the offending field. `load_scenario`
// accepts a builtin name or a path to a JSON file.
Scenario parse_scenario(const nlohmann::json& config);
Scenario load_scenario(const std::string& path_or_builtin);
std::vector<std::string> builtin_scenario_names();
nlohmann::json scenario_to_json(const Scenario& s);

// Complete artifact set of one run, filename -> bytes. Running is pure and
// in-memory; nothing is written until write_artifacts, so a failed run leaves
// no partial files.
struct RunArtifacts {
  std::map<std::string, std::string> files;
};

RunArtifacts run_scenario(const Scenario& scenario);
void write_artifacts(const RunArtifacts& artifacts, const std::filesystem::path& out_dir);

std::string sha256_hex(std::string_view bytes);

// CSV schema (fixed; column order is part of the external interface).
inline constexpr std::string_view kMetricsCsvHeader =
    "task,total_samples,model_count,memory_units,retrained_buckets,replayed_samples,"
    "fresh_samples,max_replay_count,mean_error,p95_error";

std::string format_double(double value);  // shortest round-trip
std::string to_csv_line(const MetricsRow& row);

// Inspection renderers shared by the CLI subcommands.
std::string render_layout_text(const BucketLayout& layout);
std::string render_layout_csv(const BucketLayout& layout);
nlohmann::json layout_to_json(const BucketLayout& layout);

std::string render_plan_text(const RepackPlan& plan);
std::string render_plan_csv(const RepackPlan& plan);
nlohmann::json plan_to_json(const RepackPlan& plan);

nlohmann::json histogram_to_json(const ErrorHistogram& histogram);

}  // namespace logcl
