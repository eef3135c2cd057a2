#ifndef MSGPATH_MODEL_HPP
#define MSGPATH_MODEL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "msgpath/timings.hpp"

namespace msgpath {

/// Which software layers the model accounts for: the transport HW/SW
/// interface alone, or with the MPI + protocol layers on top.
enum class StackLevel { llp_only, full_stack };

enum class Metric { injection, latency };

enum class Granularity { fine, category, on_node };

std::string to_string(StackLevel level);
std::string to_string(Metric metric);
std::string to_string(Granularity granularity);
StackLevel stack_level_from_string(const std::string& name);
Metric metric_from_string(const std::string& name);
Granularity granularity_from_string(const std::string& name);

/// Time from ringing the doorbell until the corresponding completion entry
/// lands in host memory: two I/O + network traversals plus the completion
/// write to memory.
Duration gen_completion(const ComponentTimings& t,
                        std::uint32_t completion_size_bytes = 64);

/// Smallest poll interval that hides completion generation behind posting.
/// Clamped to >= 1; requires a positive post cost.
std::uint32_t min_poll_interval(const ComponentTimings& t,
                                std::uint32_t completion_size_bytes = 64);

/// Per-message CPU cost of keeping the injection pipeline fed.
Duration cpu_time(const ComponentTimings& t, StackLevel level);

/// Steady-state time between consecutive message arrivals at the NIC.
/// Initiation overlaps I/O, so this equals cpu_time.
Duration inj_overhead(const ComponentTimings& t, StackLevel level);

/// Time for a single message to reach the NIC, with no pipelining.
Duration msg_inj_overhead(const ComponentTimings& t, StackLevel level);

/// One-way time from initiating a transfer to the payload being usable in
/// the target's receive buffer.
Duration latency(const ComponentTimings& t, StackLevel level,
                 std::uint32_t msg_size_bytes = 8);

/// |modeled - observed| / observed; observed must be positive.
double relative_error(Duration modeled, Duration observed);

struct BreakdownEntry {
  std::string label;
  Duration time;
  double percent = 0.0;
};

/// Labeled component -> time map for one metric at a chosen granularity.
struct BreakdownReport {
  Metric metric{};
  StackLevel level{};
  Granularity granularity{};
  Duration total;
  std::vector<BreakdownEntry> entries;

  std::string to_csv() const;
  std::string to_json() const;
};

/// Entry order follows the model formulas. `split_llp_post` expands the
/// post cost into its five steps in fine reports. (injection, on_node) is
/// rejected: there is no on-node split of the injection overhead.
BreakdownReport breakdown(const ComponentTimings& t, Metric metric,
                          StackLevel level, Granularity granularity,
                          std::uint32_t msg_size_bytes = 8,
                          bool split_llp_post = false);

}  // namespace msgpath

#endif  // MSGPATH_MODEL_HPP
