#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "logcl/harness.hpp"
#include "logcl/sampler.hpp"
#include "logcl/scheduler.hpp"

namespace {

void print_layout(std::uint64_t total, const std::string& format) {
  const auto layout = logcl::layout_of(total);
  if (format == "json") {
    std::cout << logcl::layout_to_json(layout).dump(2) << "\n";
  } else if (format == "csv") {
    std::cout << logcl::render_layout_csv(layout);
  } else {
    std::cout << logcl::render_layout_text(layout) << "\n";
  }
}

void print_plan(std::uint64_t total, std::uint64_t delta, const std::string& format) {
  const auto plan = logcl::plan_repack(total, delta);
  if (format == "json") {
    std::cout << logcl::plan_to_json(plan).dump(2) << "\n";
  } else if (format == "csv") {
    std::cout << logcl::render_plan_csv(plan);
  } else {
    std::cout << logcl::render_plan_text(plan);
  }
}

void print_locate(std::uint64_t total, std::uint64_t id, const std::string& format) {
  const auto layout = logcl::layout_of(total);
  const auto bucket = logcl::locate_bucket(layout, id);
  if (format == "json") {
    std::cout << nlohmann::json{{"total", total}, {"id", id}, {"bucket", bucket}}.dump(2) << "\n";
  } else if (format == "csv") {
    std::cout << "id,bucket\n" << id << "," << bucket << "\n";
  } else {
    std::cout << "id " << id << " -> bucket " << bucket << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"logcl: logarithmic generative-rehearsal scheduler simulator"};
  app.require_subcommand(1);

  std::string scenario_arg;
  std::string out_dir;
  std::uint64_t seed_override = 0;
  auto* run_cmd = app.add_subcommand("run", "run a scenario and write metrics artifacts");
  run_cmd->add_option("--scenario", scenario_arg, "scenario file or builtin name")->required();
  run_cmd->add_option("--out", out_dir, "output directory")->required();
  auto* seed_opt = run_cmd->add_option("--seed", seed_override, "override the scenario seed");

  std::string format = "text";
  std::uint64_t arg_total = 0;
  std::uint64_t arg_delta = 0;
  std::uint64_t arg_id = 0;

  auto* layout_cmd = app.add_subcommand("layout", "print the bucket layout for a total");
  layout_cmd->add_option("total", arg_total, "total number of samples")->required();

  auto* plan_cmd = app.add_subcommand("plan", "print the repack plan for one task");
  plan_cmd->add_option("total", arg_total, "samples before the task")->required();
  plan_cmd->add_option("delta", arg_delta, "task size")->required();

  auto* locate_cmd = app.add_subcommand("locate", "print the bucket holding a sample id");
  locate_cmd->add_option("total", arg_total, "total number of samples")->required();
  locate_cmd->add_option("id", arg_id, "sample id (1-based)")->required();

  for (auto* cmd : {layout_cmd, plan_cmd, locate_cmd}) {
    cmd->add_option("--format", format, "output format")
        ->check(CLI::IsMember({"text", "json", "csv"}));
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      auto scenario = logcl::load_scenario(scenario_arg);
      if (*seed_opt) scenario.seed = seed_override;
      const auto artifacts = logcl::run_scenario(scenario);
      logcl::write_artifacts(artifacts, out_dir);
      std::cout << "wrote " << artifacts.files.size() << " files to " << out_dir << "\n";
    } else if (*layout_cmd) {
      print_layout(arg_total, format);
    } else if (*plan_cmd) {
      print_plan(arg_total, arg_delta, format);
    } else if (*locate_cmd) {
      print_locate(arg_total, arg_id, format);
    }
  } catch (const logcl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
