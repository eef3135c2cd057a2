#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "msgpath/acceptance.hpp"
#include "msgpath/config_io.hpp"
#include "msgpath/model.hpp"
#include "msgpath/simulator.hpp"
#include "msgpath/trace.hpp"
#include "msgpath/whatif.hpp"

namespace py = pybind11;
using namespace msgpath;

namespace {

std::vector<double> ps_to_ns(const std::vector<std::int64_t>& ps) {
  std::vector<double> ns;
  ns.reserve(ps.size());
  for (auto v : ps) ns.push_back(static_cast<double>(v) / 1000.0);
  return ns;
}

}  // namespace

PYBIND11_MODULE(_msgpath, m) {
  m.doc() = "Small-message communication breakdown toolkit: analytical "
            "injection/latency models, a transmission-pipeline simulator, "
            "PCIe-trace estimators, and what-if sweeps";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<TraceError>(m, "TraceError");
  py::register_exception<EstimationError>(m, "EstimationError");
  py::register_exception<DeadlockError>(m, "DeadlockError");

  py::enum_<StackLevel>(m, "StackLevel")
      .value("llp_only", StackLevel::llp_only)
      .value("full_stack", StackLevel::full_stack);
  py::enum_<Metric>(m, "Metric")
      .value("injection", Metric::injection)
      .value("latency", Metric::latency);
  py::enum_<Granularity>(m, "Granularity")
      .value("fine", Granularity::fine)
      .value("category", Granularity::category)
      .value("on_node", Granularity::on_node);
  py::enum_<WorkloadMode>(m, "WorkloadMode")
      .value("llp_putbw", WorkloadMode::llp_putbw)
      .value("llp_pingpong", WorkloadMode::llp_pingpong)
      .value("mpi_window", WorkloadMode::mpi_window);
  py::enum_<Direction>(m, "Direction")
      .value("down", Direction::down)
      .value("up", Direction::up);
  py::enum_<TlpKind>(m, "TlpKind")
      .value("MWr", TlpKind::MWr)
      .value("MRd", TlpKind::MRd)
      .value("CplD", TlpKind::CplD)
      .value("ACK", TlpKind::ACK)
      .value("UpdateFC", TlpKind::UpdateFC);
  py::enum_<OptimizationTarget>(m, "OptimizationTarget")
      .value("pio_copy", OptimizationTarget::pio_copy)
      .value("llp_post_all", OptimizationTarget::llp_post_all)
      .value("llp_all", OptimizationTarget::llp_all)
      .value("hlp_all", OptimizationTarget::hlp_all)
      .value("hlp_tx_prog", OptimizationTarget::hlp_tx_prog)
      .value("hlp_rx_prog", OptimizationTarget::hlp_rx_prog)
      .value("pcie", OptimizationTarget::pcie)
      .value("rc_to_mem", OptimizationTarget::rc_to_mem)
      .value("io_all", OptimizationTarget::io_all)
      .value("wire", OptimizationTarget::wire)
      .value("switch", OptimizationTarget::switch_latency)
      .value("network_all", OptimizationTarget::network_all);

  py::class_<ComponentTimings>(m, "ComponentTimings")
      .def("llp_post_total", [](const ComponentTimings& t) { return t.llp_post_total().ns(); })
      .def("misc_inj_total", [](const ComponentTimings& t) { return t.misc_inj_total().ns(); })
      .def("hlp_post_total", [](const ComponentTimings& t) { return t.hlp_post_total().ns(); })
      .def("hlp_rx_prog_total", [](const ComponentTimings& t) { return t.hlp_rx_prog_total().ns(); })
      .def("network_total", [](const ComponentTimings& t) { return t.network_total().ns(); })
      .def("rc_to_mem", [](const ComponentTimings& t, std::uint32_t size) { return t.rc_to_mem(size).ns(); },
           py::arg("payload_bytes"))
      .def("emit", [](const ComponentTimings& t) { return emit_config(t); })
      .def("__repr__", [](const ComponentTimings& t) {
        return "<ComponentTimings llp_post=" + std::to_string(t.llp_post_total().ns()) + " ns>";
      });

  m.def("reference_timings", &reference_timings,
        "Reference timing set (same values as configs/tx2_cx4.cfg)");
  m.def("load_timings",
        [](const std::string& text, bool require_all) {
          return load_timings(text, require_all ? LoadMode::require_all
                                                : LoadMode::overlay_defaults);
        },
        py::arg("text"), py::arg("require_all") = false);
  m.def("load_timings_file",
        [](const std::string& path, bool require_all) {
          return load_timings_file(path, require_all ? LoadMode::require_all
                                                     : LoadMode::overlay_defaults);
        },
        py::arg("path"), py::arg("require_all") = false);
  m.def("emit_config", &emit_config, py::arg("timings"));

  py::class_<PipelineConfig>(m, "PipelineConfig")
      .def(py::init<>())
      .def_readwrite("poll_interval", &PipelineConfig::poll_interval)
      .def_readwrite("poll_batch", &PipelineConfig::poll_batch)
      .def_readwrite("txq_depth", &PipelineConfig::txq_depth)
      .def_readwrite("unsignaled_interval", &PipelineConfig::unsignaled_interval)
      .def_readwrite("rc_credits", &PipelineConfig::rc_credits)
      .def_readwrite("message_size_bytes", &PipelineConfig::message_size_bytes)
      .def_readwrite("completion_size_bytes", &PipelineConfig::completion_size_bytes)
      .def_readwrite("workload", &PipelineConfig::workload)
      .def_property("nic_service_ns",
                    [](const PipelineConfig& c) { return c.nic_service.ns(); },
                    [](PipelineConfig& c, double ns) { c.nic_service = Duration(ns); })
      .def("validate", &PipelineConfig::validate);

  // analytical model
  m.def("gen_completion",
        [](const ComponentTimings& t, std::uint32_t size) {
          return gen_completion(t, size).ns();
        },
        py::arg("timings"), py::arg("completion_size_bytes") = 64);
  m.def("min_poll_interval",
        [](const ComponentTimings& t, std::uint32_t size) {
          return min_poll_interval(t, size);
        },
        py::arg("timings"), py::arg("completion_size_bytes") = 64);
  m.def("cpu_time",
        [](const ComponentTimings& t, StackLevel level) { return cpu_time(t, level).ns(); },
        py::arg("timings"), py::arg("level"));
  m.def("inj_overhead",
        [](const ComponentTimings& t, StackLevel level) { return inj_overhead(t, level).ns(); },
        py::arg("timings"), py::arg("level"));
  m.def("msg_inj_overhead",
        [](const ComponentTimings& t, StackLevel level) { return msg_inj_overhead(t, level).ns(); },
        py::arg("timings"), py::arg("level"));
  m.def("latency",
        [](const ComponentTimings& t, StackLevel level, std::uint32_t msg_size) {
          return latency(t, level, msg_size).ns();
        },
        py::arg("timings"), py::arg("level"), py::arg("msg_size_bytes") = 8);
  m.def("relative_error",
        [](double modeled_ns, double observed_ns) {
          return relative_error(Duration(modeled_ns), Duration(observed_ns));
        },
        py::arg("modeled_ns"), py::arg("observed_ns"));

  py::class_<BreakdownEntry>(m, "BreakdownEntry")
      .def_readonly("label", &BreakdownEntry::label)
      .def_property_readonly("ns", [](const BreakdownEntry& e) { return e.time.ns(); })
      .def_readonly("percent", &BreakdownEntry::percent);
  py::class_<BreakdownReport>(m, "BreakdownReport")
      .def_readonly("metric", &BreakdownReport::metric)
      .def_readonly("level", &BreakdownReport::level)
      .def_readonly("granularity", &BreakdownReport::granularity)
      .def_property_readonly("total_ns", [](const BreakdownReport& r) { return r.total.ns(); })
      .def_readonly("entries", &BreakdownReport::entries)
      .def("to_csv", &BreakdownReport::to_csv)
      .def("to_json", &BreakdownReport::to_json);
  m.def("breakdown", &breakdown, py::arg("timings"), py::arg("metric"),
        py::arg("level"), py::arg("granularity"), py::arg("msg_size_bytes") = 8,
        py::arg("split_llp_post") = false);

  // simulator
  py::class_<SimResult>(m, "SimResult")
      .def_readonly("mode", &SimResult::mode)
      .def_property_readonly("nic_arrival_ns",
                             [](const SimResult& r) { return ps_to_ns(r.nic_arrival_ps); })
      .def_readonly("busy_post_count", &SimResult::busy_post_count)
      .def_readonly("completions_written", &SimResult::completions_written)
      .def_property_readonly("one_way_latency_ns",
                             [](const SimResult& r) { return ps_to_ns(r.one_way_latency_ps); })
      .def("mean_nic_interarrival_ns", &SimResult::mean_nic_interarrival_ns,
           py::arg("discard_first") = 0)
      .def("mean_one_way_latency_ns", &SimResult::mean_one_way_latency_ns)
      .def("events_csv", &SimResult::events_csv)
      .def("summary_json", &SimResult::summary_json);
  m.def("simulate_injection", &simulate_injection, py::arg("timings"),
        py::arg("config"), py::arg("n_messages"));
  m.def("simulate_pingpong", &simulate_pingpong, py::arg("timings"),
        py::arg("config"), py::arg("n_iters"),
        py::arg("level") = StackLevel::llp_only);

  // traces and estimators
  py::class_<TraceRecord>(m, "TraceRecord")
      .def(py::init<>())
      .def_property("timestamp_ns",
                    [](const TraceRecord& r) { return static_cast<double>(r.timestamp_ps) / 1000.0; },
                    [](TraceRecord& r, double ns) { r.timestamp_ps = Duration(ns).ps(); })
      .def_readwrite("direction", &TraceRecord::direction)
      .def_readwrite("kind", &TraceRecord::kind)
      .def_readwrite("payload_bytes", &TraceRecord::payload_bytes)
      .def_readwrite("tag", &TraceRecord::tag);
  m.def("synth_trace", &synth_trace, py::arg("result"), py::arg("timings"),
        py::arg("config"));
  m.def("parse_trace", &parse_trace, py::arg("text"));
  m.def("parse_trace_file", &parse_trace_file, py::arg("path"));
  m.def("records_to_csv", &records_to_csv, py::arg("records"));

  py::class_<IntervalStats>(m, "IntervalStats")
      .def_readonly("count", &IntervalStats::count)
      .def_readonly("mean_ns", &IntervalStats::mean_ns)
      .def_readonly("median_ns", &IntervalStats::median_ns)
      .def_readonly("p25_ns", &IntervalStats::p25_ns)
      .def_readonly("p75_ns", &IntervalStats::p75_ns)
      .def_readonly("min_ns", &IntervalStats::min_ns)
      .def_readonly("max_ns", &IntervalStats::max_ns);
  m.def("injection_interval_stats",
        [](const std::vector<TraceRecord>& records, double chunk_gap_ns) {
          InjectionFilter filter;
          filter.chunk_gap_ns = chunk_gap_ns;
          return injection_interval_stats(records, filter);
        },
        py::arg("records"), py::arg("chunk_gap_ns") = 5.0);
  m.def("estimate_pcie",
        [](const std::vector<TraceRecord>& r) { return estimate_pcie(r).ns(); },
        py::arg("records"));
  m.def("estimate_network",
        [](const std::vector<TraceRecord>& r, double gap) {
          return estimate_network(r, gap).ns();
        },
        py::arg("records"), py::arg("chunk_gap_ns") = 5.0);
  m.def("estimate_rc_to_mem",
        [](const std::vector<TraceRecord>& r, double pcie_ns, double post_ns,
           double prog_ns, std::uint32_t msg_size, double gap) {
          RcToMemKnowns knowns{Duration(pcie_ns), Duration(post_ns), Duration(prog_ns)};
          return estimate_rc_to_mem(r, knowns, msg_size, gap).ns();
        },
        py::arg("records"), py::arg("pcie_ns"), py::arg("llp_post_total_ns"),
        py::arg("llp_prog_ns"), py::arg("msg_size_bytes") = 8,
        py::arg("chunk_gap_ns") = 5.0);
  m.def("estimate_switch",
        [](double with_ns, double direct_ns) {
          return estimate_switch(Duration(with_ns), Duration(direct_ns)).ns();
        },
        py::arg("latency_with_switch_ns"), py::arg("latency_direct_ns"));

  // what-if sweeps
  py::class_<WhatIfPoint>(m, "WhatIfPoint")
      .def_readonly("target", &WhatIfPoint::target)
      .def_readonly("fraction", &WhatIfPoint::fraction)
      .def_readonly("metric", &WhatIfPoint::metric)
      .def_readonly("level", &WhatIfPoint::level)
      .def_readonly("baseline_ns", &WhatIfPoint::baseline_ns)
      .def_readonly("optimized_ns", &WhatIfPoint::optimized_ns)
      .def_readonly("speedup_ratio", &WhatIfPoint::speedup_ratio)
      .def_readonly("percent_reduction", &WhatIfPoint::percent_reduction);
  m.def("apply_reduction", &apply_reduction, py::arg("timings"),
        py::arg("target"), py::arg("fraction"));
  m.def("sweep",
        [](const ComponentTimings& t, const std::vector<OptimizationTarget>& targets,
           const std::vector<double>& fractions, Metric metric, StackLevel level,
           std::uint32_t msg_size) {
          return sweep(t, targets,
                       fractions.empty() ? default_sweep_fractions() : fractions,
                       metric, level, msg_size);
        },
        py::arg("timings"), py::arg("targets"),
        py::arg("fractions") = std::vector<double>{}, py::arg("metric"),
        py::arg("level"), py::arg("msg_size_bytes") = 8);
  m.def("all_optimization_targets", &all_optimization_targets);
  m.def("whatif_csv", &whatif_csv, py::arg("points"));
  m.def("confirm_with_simulator", &confirm_with_simulator, py::arg("timings"),
        py::arg("point"), py::arg("config"), py::arg("n_messages"));

  // reproduction suite
  py::class_<CriterionResult>(m, "CriterionResult")
      .def_readonly("id", &CriterionResult::id)
      .def_readonly("name", &CriterionResult::name)
      .def_readonly("passed", &CriterionResult::passed)
      .def_readonly("detail", &CriterionResult::detail);
  m.def("run_acceptance", &run_acceptance, py::arg("timings"));
}
