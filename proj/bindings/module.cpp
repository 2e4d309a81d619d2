#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <json.hpp>

#include "logcl/backends.hpp"
#include "logcl/harness.hpp"
#include "logcl/sampler.hpp"
#include "logcl/scheduler.hpp"

namespace py = pybind11;
using namespace logcl;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Logarithmic generative-rehearsal scheduling: binary-counter bucket "
            "layouts, repack planning, and the scenario simulator.";

  py::class_<IdRange>(m, "IdRange")
      .def(py::init<>())
      .def(py::init([](SampleId lo, SampleId hi) { return IdRange{lo, hi}; }), py::arg("lo"),
           py::arg("hi"))
      .def_readwrite("lo", &IdRange::lo)
      .def_readwrite("hi", &IdRange::hi)
      .def("count", &IdRange::count)
      .def("empty", &IdRange::empty)
      .def("contains", &IdRange::contains, py::arg("id"))
      .def(py::self == py::self)
      .def("__repr__", [](const IdRange& r) {
        return "IdRange(" + std::to_string(r.lo) + ", " + std::to_string(r.hi) + ")";
      });

  py::class_<BucketEntry>(m, "BucketEntry")
      .def_readwrite("bucket", &BucketEntry::bucket)
      .def_readwrite("range", &BucketEntry::range)
      .def(py::self == py::self)
      .def("__repr__", [](const BucketEntry& e) {
        return std::to_string(e.bucket) + ":[" + std::to_string(e.range.lo) + "-" +
               std::to_string(e.range.hi) + "]";
      });

  py::class_<BucketLayout>(m, "BucketLayout")
      .def_readwrite("total", &BucketLayout::total)
      .def_readwrite("entries", &BucketLayout::entries)
      .def(py::self == py::self)
      .def("__repr__", [](const BucketLayout& l) { return render_layout_text(l); });

  py::class_<ReplaySlice>(m, "ReplaySlice")
      .def_readwrite("source", &ReplaySlice::source)
      .def_readwrite("ids", &ReplaySlice::ids)
      .def(py::self == py::self);

  py::class_<BucketTraining>(m, "BucketTraining")
      .def_readwrite("target", &BucketTraining::target)
      .def_readwrite("replayed", &BucketTraining::replayed)
      .def_readwrite("fresh", &BucketTraining::fresh)
      .def("replayed_count", &BucketTraining::replayed_count)
      .def("input_count", &BucketTraining::input_count)
      .def(py::self == py::self);

  py::class_<RepackPlan>(m, "RepackPlan")
      .def_readwrite("old_total", &RepackPlan::old_total)
      .def_readwrite("new_total", &RepackPlan::new_total)
      .def_readwrite("pivot", &RepackPlan::pivot)
      .def_readwrite("trainings", &RepackPlan::trainings)
      .def_readwrite("untouched", &RepackPlan::untouched)
      .def(py::self == py::self)
      .def("__repr__", [](const RepackPlan& p) { return render_plan_text(p); });

  py::class_<LayoutVerdict>(m, "LayoutVerdict")
      .def_readonly("valid", &LayoutVerdict::valid)
      .def_readonly("rule", &LayoutVerdict::rule)
      .def_readonly("detail", &LayoutVerdict::detail)
      .def("__bool__", [](const LayoutVerdict& v) { return v.valid; })
      .def("__repr__", [](const LayoutVerdict& v) {
        return v.valid ? std::string("valid") : v.rule + ": " + v.detail;
      });

  py::class_<MemoryModel>(m, "MemoryModel")
      .def(py::init([](double s_max, double per_sample_raw) {
             return MemoryModel{s_max, per_sample_raw};
           }),
           py::arg("s_max") = 1.0, py::arg("per_sample_raw") = 0.01)
      .def_readwrite("s_max", &MemoryModel::s_max)
      .def_readwrite("per_sample_raw", &MemoryModel::per_sample_raw);

  m.def("layout_of", &layout_of, py::arg("total"),
        "Bucket layout for a running sample total (binary notation).");
  m.def("pivot_bit", &pivot_bit, py::arg("old_total"), py::arg("new_total"),
        "Most significant bit position differing between two totals.");
  m.def("plan_repack", &plan_repack, py::arg("old_total"), py::arg("task_size"),
        "Consolidated repack plan for one task.");
  m.def("validate_layout", &validate_layout, py::arg("layout"));
  m.def("max_models_bound", &max_models_bound, py::arg("total"));
  m.def("occupied_buckets", &occupied_buckets, py::arg("total"));
  m.def("ceil_log2", &ceil_log2, py::arg("n"));
  m.def("locate_bucket", &locate_bucket, py::arg("layout"), py::arg("id"),
        "Bucket index whose range contains the sample id.");
  m.def("bucket_size", &bucket_size, py::arg("bucket"), py::arg("largest"), py::arg("memory"),
        "Memory units of one bucket given the largest occupied index.");
  m.def("total_memory", &total_memory, py::arg("layout"), py::arg("memory"));

  m.def("builtin_scenario_names", &builtin_scenario_names);
  m.def(
      "load_scenario_json",
      [](const std::string& path_or_builtin) {
        return scenario_to_json(load_scenario(path_or_builtin)).dump(2);
      },
      py::arg("path_or_builtin"),
      "Resolve a builtin name or scenario file to its canonical JSON form.");
  m.def(
      "simulate",
      [](const std::string& config_json) {
        const auto scenario = parse_scenario(nlohmann::json::parse(config_json));
        return run_scenario(scenario).files;
      },
      py::arg("config_json"),
      "Run a scenario in memory; returns {filename: contents}.");
  m.def(
      "run_scenario",
      [](const std::string& config_json, const std::filesystem::path& out_dir) {
        const auto scenario = parse_scenario(nlohmann::json::parse(config_json));
        write_artifacts(run_scenario(scenario), out_dir);
      },
      py::arg("config_json"), py::arg("out_dir"),
      "Run a scenario and write its artifacts to a directory.");

  py::register_exception<ConfigError>(m, "ConfigError");
}
