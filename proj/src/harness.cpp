#include "logcl/harness.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <utility>

#include <openssl/evp.h>

#include "logcl/baselines.hpp"
#include "logcl/rng.hpp"
#include "logcl/sampler.hpp"
#include "logcl/volume.hpp"

namespace logcl {

using nlohmann::json;

namespace {

// Fixed salts for the per-purpose random streams of one scenario seed.
constexpr std::uint64_t kSaltRegistry = 0xA1;
constexpr std::uint64_t kSaltLogclBackend = 0xB2;
constexpr std::uint64_t kSaltSingleBackend = 0xC3;
constexpr std::uint64_t kSaltRehearsal = 0xD4;

std::vector<double> default_histogram_edges() {
  // Decades covering both the noisy regime (~1e-2..1) and runaway analytic
  // degradation; an explicit zero bin exists on top of these.
  std::vector<double> edges;
  for (int k = -6; k <= 16; ++k) edges.push_back(std::pow(10.0, k));
  return edges;
}

const json& require_field(const json& obj, const std::string& key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(where + ": missing required field '" + key + "'");
  return *it;
}

std::uint64_t as_uint(const json& value, const std::string& where) {
  if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<std::int64_t>() >= 0))
    throw ConfigError(where + ": expected a nonnegative integer");
  return value.get<std::uint64_t>();
}

double as_positive(const json& value, const std::string& where) {
  if (!value.is_number()) throw ConfigError(where + ": expected a number");
  const double v = value.get<double>();
  if (!(v > 0.0)) throw ConfigError(where + ": must be > 0");
  return v;
}

double as_nonnegative(const json& value, const std::string& where) {
  if (!value.is_number()) throw ConfigError(where + ": expected a number");
  const double v = value.get<double>();
  if (!(v >= 0.0)) throw ConfigError(where + ": must be >= 0");
  return v;
}

void reject_unknown(const json& obj, std::initializer_list<std::string_view> known,
                    const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const auto k : known) ok = ok || key == k;
    if (!ok) throw ConfigError(where + ": unknown field '" + key + "'");
  }
}

}  // namespace

std::string_view system_name(SystemKind kind) {
  switch (kind) {
    case SystemKind::logcl: return "logcl";
    case SystemKind::single_replay: return "single_replay";
    case SystemKind::buffer: return "buffer";
  }
  return "?";
}

std::string format_double(double value) {
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

Scenario parse_scenario(const json& config) {
  if (!config.is_object()) throw ConfigError("scenario: expected a JSON object");
  reject_unknown(config,
                 {"name", "seed", "tasks", "backend", "memory", "volume_unit", "rehearsal",
                  "histogram_edges", "classes", "systems"},
                 "scenario");

  Scenario s;
  s.name = require_field(config, "name", "scenario").get<std::string>();
  if (s.name.empty()) throw ConfigError("name: must not be empty");
  s.seed = as_uint(require_field(config, "seed", "scenario"), "seed");

  const json& tasks = require_field(config, "tasks", "scenario");
  reject_unknown(tasks, {"sizes", "count", "size"}, "tasks");
  if (tasks.contains("sizes")) {
    if (tasks.contains("count") || tasks.contains("size"))
      throw ConfigError("tasks: give either 'sizes' or 'count'+'size', not both");
    const json& sizes = tasks["sizes"];
    if (!sizes.is_array()) throw ConfigError("tasks.sizes: expected an array");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      const auto v = as_uint(sizes[i], "tasks.sizes[" + std::to_string(i) + "]");
      if (v == 0) throw ConfigError("tasks.sizes[" + std::to_string(i) + "]: must be >= 1");
      s.task_sizes.push_back(v);
    }
  } else {
    const auto count = as_uint(require_field(tasks, "count", "tasks"), "tasks.count");
    const auto size = as_uint(require_field(tasks, "size", "tasks"), "tasks.size");
    if (size == 0) throw ConfigError("tasks.size: must be >= 1");
    s.task_sizes.assign(count, size);
  }
  if (s.task_sizes.empty()) throw ConfigError("tasks: task list must not be empty");

  if (config.contains("backend")) {
    const json& backend = config["backend"];
    reject_unknown(backend, {"kind", "epsilon0", "gamma", "sigma_train", "dim"}, "backend");
    const std::string kind = require_field(backend, "kind", "backend").get<std::string>();
    if (kind == "analytic") {
      s.backend = BackendKind::analytic;
    } else if (kind == "noisy") {
      s.backend = BackendKind::noisy;
    } else {
      throw ConfigError("backend.kind: expected 'analytic' or 'noisy', got '" + kind + "'");
    }
    if (backend.contains("epsilon0")) s.epsilon0 = as_positive(backend["epsilon0"], "backend.epsilon0");
    if (backend.contains("gamma")) {
      s.gamma = as_positive(backend["gamma"], "backend.gamma");
      if (s.gamma < 1.0) throw ConfigError("backend.gamma: must be >= 1");
    }
    if (backend.contains("sigma_train"))
      s.sigma_train = as_nonnegative(backend["sigma_train"], "backend.sigma_train");
    if (backend.contains("dim"))
      s.dim = static_cast<std::uint32_t>(as_uint(backend["dim"], "backend.dim"));
  }
  if (s.backend == BackendKind::noisy && s.dim == 0)
    throw ConfigError("backend.dim: noisy backend needs payload dimension >= 1");

  if (config.contains("memory")) {
    const json& memory = config["memory"];
    reject_unknown(memory, {"s_max", "per_sample_raw"}, "memory");
    if (memory.contains("s_max")) s.memory.s_max = as_positive(memory["s_max"], "memory.s_max");
    s.memory.per_sample_raw = memory.contains("per_sample_raw")
                                  ? as_positive(memory["per_sample_raw"], "memory.per_sample_raw")
                                  : 0.01 * s.memory.s_max;
  }

  if (config.contains("volume_unit")) {
    s.volume_unit = static_cast<std::uint32_t>(as_uint(config["volume_unit"], "volume_unit"));
    if (s.volume_unit == 0) throw ConfigError("volume_unit: must be >= 1");
  }

  if (config.contains("rehearsal")) {
    const json& rehearsal = config["rehearsal"];
    reject_unknown(rehearsal, {"draws", "sigma_aug"}, "rehearsal");
    if (rehearsal.contains("draws")) s.rehearsal_draws = as_uint(rehearsal["draws"], "rehearsal.draws");
    if (rehearsal.contains("sigma_aug"))
      s.sigma_aug = as_nonnegative(rehearsal["sigma_aug"], "rehearsal.sigma_aug");
  }

  if (config.contains("histogram_edges")) {
    const json& edges = config["histogram_edges"];
    if (!edges.is_array() || edges.size() < 2)
      throw ConfigError("histogram_edges: expected an array of at least two numbers");
    for (std::size_t i = 0; i < edges.size(); ++i) {
      if (!edges[i].is_number())
        throw ConfigError("histogram_edges[" + std::to_string(i) + "]: expected a number");
      s.histogram_edges.push_back(edges[i].get<double>());
    }
    for (std::size_t i = 1; i < s.histogram_edges.size(); ++i) {
      if (!(s.histogram_edges[i - 1] < s.histogram_edges[i]))
        throw ConfigError("histogram_edges: must be strictly increasing");
    }
    if (s.histogram_edges.front() <= 0.0)
      throw ConfigError("histogram_edges: edges must be positive (zero errors have their own bin)");
  } else {
    s.histogram_edges = default_histogram_edges();
  }

  if (config.contains("classes")) {
    s.classes = static_cast<std::uint32_t>(as_uint(config["classes"], "classes"));
    if (s.classes == 0) throw ConfigError("classes: must be >= 1");
  }

  if (config.contains("systems")) {
    const json& systems = config["systems"];
    if (!systems.is_array() || systems.empty())
      throw ConfigError("systems: expected a non-empty array");
    for (const auto& entry : systems) {
      const std::string name = entry.is_string() ? entry.get<std::string>() : "";
      if (name == "logcl") {
        s.systems.push_back(SystemKind::logcl);
      } else if (name == "single_replay") {
        s.systems.push_back(SystemKind::single_replay);
      } else if (name == "buffer") {
        s.systems.push_back(SystemKind::buffer);
      } else {
        throw ConfigError("systems: expected 'logcl', 'single_replay' or 'buffer'");
      }
    }
  } else {
    s.systems = {SystemKind::logcl, SystemKind::single_replay, SystemKind::buffer};
  }

  return s;
}

json scenario_to_json(const Scenario& s) {
  json backend;
  if (s.backend == BackendKind::analytic) {
    backend = {{"kind", "analytic"}, {"epsilon0", s.epsilon0}, {"gamma", s.gamma}};
  } else {
    backend = {{"kind", "noisy"}, {"sigma_train", s.sigma_train}, {"dim", s.dim}};
  }
  json systems = json::array();
  for (const auto kind : s.systems) systems.push_back(std::string(system_name(kind)));
  return json{{"name", s.name},
              {"seed", s.seed},
              {"tasks", {{"sizes", s.task_sizes}}},
              {"backend", backend},
              {"memory", {{"s_max", s.memory.s_max}, {"per_sample_raw", s.memory.per_sample_raw}}},
              {"volume_unit", s.volume_unit},
              {"rehearsal", {{"draws", s.rehearsal_draws}, {"sigma_aug", s.sigma_aug}}},
              {"histogram_edges", s.histogram_edges},
              {"classes", s.classes},
              {"systems", systems}};
}

std::vector<std::string> builtin_scenario_names() { return {"extreme100", "extreme100_noisy"}; }

namespace {

json builtin_config(std::string_view name) {
  // The canonical 100-task sequence; the noisy twin swaps the backend.
  json config{{"name", std::string(name)},
              {"seed", 1337},
              {"tasks", {{"count", 100}, {"size", 64}}},
              {"backend", {{"kind", "analytic"}, {"epsilon0", 0.01}, {"gamma", 1.5}}},
              {"memory", {{"s_max", 1.0}, {"per_sample_raw", 0.01}}},
              {"systems", {"logcl", "single_replay", "buffer"}}};
  if (name == "extreme100") return config;
  if (name == "extreme100_noisy") {
    config["backend"] = {{"kind", "noisy"}, {"sigma_train", 0.05}, {"dim", 32}};
    return config;
  }
  throw ConfigError("unknown builtin scenario '" + std::string(name) + "'");
}

}  // namespace

Scenario load_scenario(const std::string& path_or_builtin) {
  for (const auto& name : builtin_scenario_names()) {
    if (name == path_or_builtin) return parse_scenario(builtin_config(name));
  }
  std::ifstream in(path_or_builtin, std::ios::binary);
  if (!in) throw ConfigError("cannot open scenario file '" + path_or_builtin + "'");
  json config;
  try {
    config = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path_or_builtin + ": " + e.what());
  }
  return parse_scenario(config);
}

namespace {

struct SystemOutputs {
  std::string csv;
  ErrorHistogram histogram;
  std::uint64_t total_samples = 0;
};

void check_scenario(const Scenario& s) {
  if (s.task_sizes.empty()) throw ConfigError("tasks: task list must not be empty");
  for (const auto size : s.task_sizes) {
    if (size == 0) throw ConfigError("tasks: task sizes must be >= 1");
  }
  if (s.systems.empty()) throw ConfigError("systems: at least one system is required");
  if (s.volume_unit == 0) throw ConfigError("volume_unit: must be >= 1");
  if (s.backend == BackendKind::noisy && s.dim == 0)
    throw ConfigError("backend.dim: noisy backend needs payload dimension >= 1");
}

std::shared_ptr<LocalModelBackend> make_backend(const Scenario& s, std::uint64_t salt,
                                                const std::shared_ptr<const OriginalRegistry>& reg) {
  if (s.backend == BackendKind::analytic)
    return std::make_shared<AnalyticErrorModel>(s.epsilon0, s.gamma);
  return std::make_shared<NoisyLossyStore>(s.sigma_train, splitmix64(s.seed ^ splitmix64(salt)), reg);
}

}  // namespace

RunArtifacts run_scenario(const Scenario& scenario) {
  check_scenario(scenario);

  const std::uint32_t registry_dim = scenario.backend == BackendKind::noisy ? scenario.dim : 0;
  auto registry = std::make_shared<OriginalRegistry>(
      splitmix64(scenario.seed ^ splitmix64(kSaltRegistry)), registry_dim, scenario.classes);

  RunArtifacts artifacts;
  std::string rehearsal_ndjson;

  for (const auto kind : scenario.systems) {
    SystemOutputs out;
    out.csv.append(kMetricsCsvHeader);
    out.csv.push_back('\n');

    std::unique_ptr<LogClSystem> logcl_system;
    std::unique_ptr<SingleReplaySystem> single_system;
    std::unique_ptr<BufferSystem> buffer_system;
    switch (kind) {
      case SystemKind::logcl:
        logcl_system = std::make_unique<LogClSystem>(
            scenario.volume_unit, make_backend(scenario, kSaltLogclBackend, registry), registry,
            scenario.memory);
        break;
      case SystemKind::single_replay:
        single_system = std::make_unique<SingleReplaySystem>(
            make_backend(scenario, kSaltSingleBackend, registry), registry, scenario.memory);
        break;
      case SystemKind::buffer:
        buffer_system = std::make_unique<BufferSystem>(scenario.memory);
        break;
    }

    SampleId next_id = 1;
    std::vector<FreshSample> fresh;
    for (const auto size : scenario.task_sizes) {
      fresh.clear();
      fresh.reserve(size);
      for (std::uint64_t i = 0; i < size; ++i, ++next_id)
        fresh.push_back({next_id, registry->label(next_id)});
      MetricsRow row;
      if (logcl_system) row = logcl_system->step(fresh);
      if (single_system) row = single_system->step(fresh);
      if (buffer_system) row = buffer_system->step(fresh);
      out.csv.append(to_csv_line(row));
      out.csv.push_back('\n');
      out.total_samples = row.total_samples;
    }

    if (logcl_system) out.histogram = logcl_system->error_histogram(scenario.histogram_edges);
    if (single_system) out.histogram = single_system->error_histogram(scenario.histogram_edges);
    if (buffer_system) out.histogram = buffer_system->error_histogram(scenario.histogram_edges);

    if (logcl_system && scenario.rehearsal_draws > 0) {
      const Ledger& ledger = logcl_system->ledger();
      if (ledger.total() == 0)
        throw ConfigError("rehearsal.draws: no flushed samples to rehearse from");
      const auto stream = sample_rehearsal_stream(
          ledger.layout(), ledger.stores(), scenario.rehearsal_draws, scenario.sigma_aug,
          splitmix64(scenario.seed ^ splitmix64(kSaltRehearsal)));
      for (const auto& item : stream) {
        rehearsal_ndjson.append(json{{"id", item.id},
                                     {"bucket", item.bucket},
                                     {"error", item.error},
                                     {"label", item.label}}
                                    .dump());
        rehearsal_ndjson.push_back('\n');
      }
    }

    const std::string name(system_name(kind));
    artifacts.files["metrics_" + name + ".csv"] = std::move(out.csv);
    json hist = histogram_to_json(out.histogram);
    hist["system"] = name;
    hist["total_samples"] = out.total_samples;
    artifacts.files["histogram_" + name + ".json"] = hist.dump(2) + "\n";
  }

  if (!rehearsal_ndjson.empty())
    artifacts.files["rehearsal_logcl.ndjson"] = std::move(rehearsal_ndjson);

  json outputs;
  for (const auto& [file, bytes] : artifacts.files) {
    outputs[file] = {{"bytes", bytes.size()}, {"sha256", sha256_hex(bytes)}};
  }
  const json manifest{{"name", scenario.name},
                      {"scenario", scenario_to_json(scenario)},
                      {"outputs", outputs}};
  artifacts.files["manifest.json"] = manifest.dump(2) + "\n";
  return artifacts;
}

void write_artifacts(const RunArtifacts& artifacts, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  for (const auto& [file, bytes] : artifacts.files) {
    std::ofstream out(out_dir / file, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open output file " + (out_dir / file).string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("failed writing " + (out_dir / file).string());
  }
}

std::string to_csv_line(const MetricsRow& row) {
  std::string line;
  line.append(std::to_string(row.task));
  line.push_back(',');
  line.append(std::to_string(row.total_samples));
  line.push_back(',');
  line.append(std::to_string(row.model_count));
  line.push_back(',');
  line.append(format_double(row.memory_units));
  line.push_back(',');
  line.append(std::to_string(row.retrained_buckets));
  line.push_back(',');
  line.append(std::to_string(row.replayed_samples));
  line.push_back(',');
  line.append(std::to_string(row.fresh_samples));
  line.push_back(',');
  line.append(std::to_string(row.max_replay_count));
  line.push_back(',');
  line.append(format_double(row.mean_error));
  line.push_back(',');
  line.append(format_double(row.p95_error));
  return line;
}

namespace {

std::string range_text(const IdRange& range) {
  return "[" + std::to_string(range.lo) + "-" + std::to_string(range.hi) + "]";
}

}  // namespace

std::string render_layout_text(const BucketLayout& layout) {
  std::string out = "{";
  for (std::size_t i = 0; i < layout.entries.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(layout.entries[i].bucket) + ":" + range_text(layout.entries[i].range);
  }
  out += "}";
  return out;
}

std::string render_layout_csv(const BucketLayout& layout) {
  std::string out = "bucket,lo,hi\n";
  for (const auto& e : layout.entries) {
    out += std::to_string(e.bucket) + "," + std::to_string(e.range.lo) + "," +
           std::to_string(e.range.hi) + "\n";
  }
  return out;
}

json layout_to_json(const BucketLayout& layout) {
  json entries = json::array();
  for (const auto& e : layout.entries)
    entries.push_back({{"bucket", e.bucket}, {"lo", e.range.lo}, {"hi", e.range.hi}});
  return {{"total", layout.total}, {"entries", entries}};
}

std::string render_plan_text(const RepackPlan& plan) {
  std::string out = "old=" + std::to_string(plan.old_total) + " new=" +
                    std::to_string(plan.new_total) + " pivot=" + std::to_string(plan.pivot) + "\n";
  out += "untouched: {";
  for (std::size_t i = 0; i < plan.untouched.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(plan.untouched[i]);
  }
  out += "}\n";
  for (const auto& t : plan.trainings) {
    out += "train " + std::to_string(t.target) + ":";
    bool first = true;
    for (const auto& slice : t.replayed) {
      out += first ? " replayed " : ", ";
      out += std::to_string(slice.source) + ":" + range_text(slice.ids);
      first = false;
    }
    if (!t.fresh.empty()) {
      out += first ? " fresh " : "; fresh ";
      out += range_text(t.fresh);
    }
    out += "\n";
  }
  return out;
}

std::string render_plan_csv(const RepackPlan& plan) {
  const BucketLayout old_layout = layout_of(plan.old_total);
  std::string out = "kind,bucket,source,lo,hi\n";
  for (const auto k : plan.untouched) {
    for (const auto& e : old_layout.entries) {
      if (e.bucket != k) continue;
      out += "untouched," + std::to_string(k) + ",," + std::to_string(e.range.lo) + "," +
             std::to_string(e.range.hi) + "\n";
    }
  }
  for (const auto& t : plan.trainings) {
    for (const auto& slice : t.replayed) {
      out += "replayed," + std::to_string(t.target) + "," + std::to_string(slice.source) + "," +
             std::to_string(slice.ids.lo) + "," + std::to_string(slice.ids.hi) + "\n";
    }
    if (!t.fresh.empty()) {
      out += "fresh," + std::to_string(t.target) + ",," + std::to_string(t.fresh.lo) + "," +
             std::to_string(t.fresh.hi) + "\n";
    }
  }
  return out;
}

json plan_to_json(const RepackPlan& plan) {
  json trainings = json::array();
  for (const auto& t : plan.trainings) {
    json replayed = json::array();
    for (const auto& slice : t.replayed)
      replayed.push_back({{"source", slice.source}, {"lo", slice.ids.lo}, {"hi", slice.ids.hi}});
    json fresh;
    if (!t.fresh.empty()) fresh = {{"lo", t.fresh.lo}, {"hi", t.fresh.hi}};
    trainings.push_back({{"target", t.target}, {"replayed", replayed}, {"fresh", fresh}});
  }
  return {{"old_total", plan.old_total},
          {"new_total", plan.new_total},
          {"pivot", plan.pivot},
          {"untouched", plan.untouched},
          {"trainings", trainings}};
}

json histogram_to_json(const ErrorHistogram& histogram) {
  return {{"empty", histogram.empty},
          {"zero_mass", histogram.zero_mass},
          {"underflow", histogram.underflow},
          {"overflow", histogram.overflow},
          {"edges", histogram.edges},
          {"bins", histogram.bin_mass}};
}

}  // namespace logcl
