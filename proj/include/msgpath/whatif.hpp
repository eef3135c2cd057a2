#ifndef MSGPATH_WHATIF_HPP
#define MSGPATH_WHATIF_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "msgpath/model.hpp"
#include "msgpath/timings.hpp"

namespace msgpath {

/// Reducible component sets. io_all covers both PCIe traversals and the
/// RC-to-memory write; the *_all targets bound what optimizing a whole
/// layer could buy.
enum class OptimizationTarget {
  pio_copy,
  llp_post_all,
  llp_all,
  hlp_all,
  hlp_tx_prog,
  hlp_rx_prog,
  pcie,
  rc_to_mem,
  io_all,
  wire,
  switch_latency,
  network_all,
};

std::string to_string(OptimizationTarget target);
OptimizationTarget optimization_target_from_string(const std::string& name);
const std::vector<OptimizationTarget>& all_optimization_targets();

/// One point of a what-if sweep: reduce `target` by `fraction`, recompute
/// the metric, and report both framings of the improvement.
struct WhatIfPoint {
  OptimizationTarget target{};
  double fraction = 0.0;
  Metric metric{};
  StackLevel level{};
  double baseline_ns = 0.0;
  double optimized_ns = 0.0;
  double speedup_ratio = 1.0;       // baseline / optimized
  double percent_reduction = 0.0;   // 100 * (baseline - optimized) / baseline
};

/// Copy of t with every field in the target set scaled by (1 - fraction).
/// fraction must lie in [0, 1].
ComponentTimings apply_reduction(const ComponentTimings& t,
                                 OptimizationTarget target, double fraction);

double evaluate_metric_ns(const ComponentTimings& t, Metric metric,
                          StackLevel level, std::uint32_t msg_size_bytes = 8);

/// Cartesian product of targets x fractions, evaluated through the
/// analytical model. Default fractions are {0.1, 0.3, 0.5, 0.7, 0.9}.
std::vector<WhatIfPoint> sweep(const ComponentTimings& t,
                               const std::vector<OptimizationTarget>& targets,
                               const std::vector<double>& fractions,
                               Metric metric, StackLevel level,
                               std::uint32_t msg_size_bytes = 8);

const std::vector<double>& default_sweep_fractions();

/// Re-derives one sweep point's optimized metric from a simulator run on the
/// reduced timings (steady-state injection or ping-pong latency). The model
/// terms do not overlap, so this should agree with the analytical value.
double confirm_with_simulator(const ComponentTimings& t,
                              const WhatIfPoint& point,
                              const PipelineConfig& cfg,
                              std::uint64_t n_messages);

std::string whatif_csv(const std::vector<WhatIfPoint>& points);
std::string whatif_gnuplot(const std::vector<WhatIfPoint>& points);

}  // namespace msgpath

#endif  // MSGPATH_WHATIF_HPP
