#include "msgpath/whatif.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "msgpath/simulator.hpp"

namespace msgpath {

namespace {

const std::map<OptimizationTarget, std::string>& target_names() {
  static const std::map<OptimizationTarget, std::string> names = {
      {OptimizationTarget::pio_copy, "pio_copy"},
      {OptimizationTarget::llp_post_all, "llp_post_all"},
      {OptimizationTarget::llp_all, "llp_all"},
      {OptimizationTarget::hlp_all, "hlp_all"},
      {OptimizationTarget::hlp_tx_prog, "hlp_tx_prog"},
      {OptimizationTarget::hlp_rx_prog, "hlp_rx_prog"},
      {OptimizationTarget::pcie, "pcie"},
      {OptimizationTarget::rc_to_mem, "rc_to_mem"},
      {OptimizationTarget::io_all, "io_all"},
      {OptimizationTarget::wire, "wire"},
      {OptimizationTarget::switch_latency, "switch"},
      {OptimizationTarget::network_all, "network_all"},
  };
  return names;
}

void scale_fields(ComponentTimings& t, OptimizationTarget target, double k) {
  auto scale = [k](Duration& d) { d = k * d; };
  auto scale_llp_post = [&] {
    scale(t.llp_post.md_setup);
    scale(t.llp_post.barrier_md);
    scale(t.llp_post.barrier_dbc);
    scale(t.llp_post.pio_copy);
    scale(t.llp_post.misc);
  };
  auto scale_rc = [&] {
    RcToMemTable scaled;
    for (const auto& [size, dur] : t.io_net.rc_to_mem.entries()) {
      scaled.set(size, k * dur);
    }
    t.io_net.rc_to_mem = scaled;
  };
  switch (target) {
    case OptimizationTarget::pio_copy:
      scale(t.llp_post.pio_copy);
      break;
    case OptimizationTarget::llp_post_all:
      scale_llp_post();
      break;
    case OptimizationTarget::llp_all:
      scale_llp_post();
      scale(t.llp_prog);
      break;
    case OptimizationTarget::hlp_all:
      scale(t.hlp.isend_mpi);
      scale(t.hlp.isend_proto);
      scale(t.hlp.tx_prog);
      scale(t.hlp.rx_cb_mpi);
      scale(t.hlp.rx_cb_proto);
      scale(t.hlp.rx_post_progress_mpi);
      break;
    case OptimizationTarget::hlp_tx_prog:
      scale(t.hlp.tx_prog);
      break;
    case OptimizationTarget::hlp_rx_prog:
      scale(t.hlp.rx_cb_mpi);
      scale(t.hlp.rx_cb_proto);
      scale(t.hlp.rx_post_progress_mpi);
      break;
    case OptimizationTarget::pcie:
      scale(t.io_net.pcie);
      break;
    case OptimizationTarget::rc_to_mem:
      scale_rc();
      break;
    case OptimizationTarget::io_all:
      scale(t.io_net.pcie);
      scale_rc();
      break;
    case OptimizationTarget::wire:
      scale(t.io_net.wire);
      break;
    case OptimizationTarget::switch_latency:
      scale(t.io_net.switch_latency);
      break;
    case OptimizationTarget::network_all:
      scale(t.io_net.wire);
      scale(t.io_net.switch_latency);
      break;
  }
}

}  // namespace

std::string to_string(OptimizationTarget target) {
  return target_names().at(target);
}

OptimizationTarget optimization_target_from_string(const std::string& name) {
  for (const auto& [target, n] : target_names()) {
    if (n == name) return target;
  }
  throw std::invalid_argument("unknown optimization target '" + name + "'");
}

const std::vector<OptimizationTarget>& all_optimization_targets() {
  static const std::vector<OptimizationTarget> all = [] {
    std::vector<OptimizationTarget> v;
    for (const auto& [target, name] : target_names()) v.push_back(target);
    return v;
  }();
  return all;
}

ComponentTimings apply_reduction(const ComponentTimings& t,
                                 OptimizationTarget target, double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("reduction fraction must be in [0, 1]");
  }
  ComponentTimings reduced = t;
  scale_fields(reduced, target, 1.0 - fraction);
  return reduced;
}

double evaluate_metric_ns(const ComponentTimings& t, Metric metric,
                          StackLevel level, std::uint32_t msg_size_bytes) {
  if (metric == Metric::injection) {
    return inj_overhead(t, level).ns();
  }
  return latency(t, level, msg_size_bytes).ns();
}

std::vector<WhatIfPoint> sweep(const ComponentTimings& t,
                               const std::vector<OptimizationTarget>& targets,
                               const std::vector<double>& fractions,
                               Metric metric, StackLevel level,
                               std::uint32_t msg_size_bytes) {
  std::vector<WhatIfPoint> points;
  points.reserve(targets.size() * fractions.size());
  const double baseline = evaluate_metric_ns(t, metric, level, msg_size_bytes);
  for (auto target : targets) {
    for (double fraction : fractions) {
      ComponentTimings reduced = apply_reduction(t, target, fraction);
      WhatIfPoint p;
      p.target = target;
      p.fraction = fraction;
      p.metric = metric;
      p.level = level;
      p.baseline_ns = baseline;
      p.optimized_ns = evaluate_metric_ns(reduced, metric, level, msg_size_bytes);
      if (p.optimized_ns > 0.0) {
        p.speedup_ratio = baseline / p.optimized_ns;
      } else {
        p.speedup_ratio = baseline > 0.0
                              ? std::numeric_limits<double>::infinity()
                              : 1.0;
      }
      p.percent_reduction =
          baseline > 0.0 ? 100.0 * (baseline - p.optimized_ns) / baseline : 0.0;
      points.push_back(p);
    }
  }
  return points;
}

const std::vector<double>& default_sweep_fractions() {
  static const std::vector<double> fractions = {0.1, 0.3, 0.5, 0.7, 0.9};
  return fractions;
}

double confirm_with_simulator(const ComponentTimings& t,
                              const WhatIfPoint& point,
                              const PipelineConfig& cfg,
                              std::uint64_t n_messages) {
  ComponentTimings reduced = apply_reduction(t, point.target, point.fraction);
  if (point.metric == Metric::latency) {
    PipelineConfig pp = cfg;
    pp.workload = WorkloadMode::llp_pingpong;
    auto result = simulate_pingpong(reduced, pp, n_messages, point.level);
    return result.mean_one_way_latency_ns();
  }
  PipelineConfig ic = cfg;
  ic.workload = point.level == StackLevel::full_stack ? WorkloadMode::mpi_window
                                                      : WorkloadMode::llp_putbw;
  if (ic.workload == WorkloadMode::mpi_window) {
    // The full-stack progress costs presuppose amortized (unsignaled)
    // completions, so confirm with at least the transport's default
    // interval, and keep queue slack so the pipeline never stalls on
    // completion round trips.
    ic.unsignaled_interval = std::max(ic.unsignaled_interval, 64u);
    if (ic.txq_depth < 2 * ic.unsignaled_interval) {
      ic.txq_depth = 2 * ic.unsignaled_interval;
    }
  }
  auto result = simulate_injection(reduced, ic, n_messages);
  return result.mean_nic_interarrival_ns(2 * ic.txq_depth);
}

std::string whatif_csv(const std::vector<WhatIfPoint>& points) {
  std::ostringstream out;
  out << "target,fraction,metric,level,baseline_ns,optimized_ns,"
         "speedup_ratio,percent_reduction\n";
  char buf[192];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof(buf), "%s,%.4f,%s,%s,%.3f,%.3f,%.6f,%.4f\n",
                  to_string(p.target).c_str(), p.fraction,
                  to_string(p.metric).c_str(), to_string(p.level).c_str(),
                  p.baseline_ns, p.optimized_ns, p.speedup_ratio,
                  p.percent_reduction);
    out << buf;
  }
  return out.str();
}

std::string whatif_gnuplot(const std::vector<WhatIfPoint>& points) {
  std::ostringstream out;
  OptimizationTarget current{};
  bool first = true;
  char buf[128];
  for (const auto& p : points) {
    if (first || p.target != current) {
      if (!first) out << "\n\n";
      out << "# target=" << to_string(p.target) << "  ("
          << to_string(p.metric) << ", " << to_string(p.level) << ")\n";
      out << "# fraction optimized_ns speedup percent_reduction\n";
      current = p.target;
      first = false;
    }
    std::snprintf(buf, sizeof(buf), "%.4f %.3f %.6f %.4f\n", p.fraction,
                  p.optimized_ns, p.speedup_ratio, p.percent_reduction);
    out << buf;
  }
  if (!first) out << "\n";
  return out.str();
}

}  // namespace msgpath
