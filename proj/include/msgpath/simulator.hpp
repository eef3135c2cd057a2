#ifndef MSGPATH_SIMULATOR_HPP
#define MSGPATH_SIMULATOR_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "msgpath/model.hpp"
#include "msgpath/timings.hpp"
#include "msgpath/trace.hpp"

namespace msgpath {

/// The transmit queue filled up with no harvestable completion in flight,
/// e.g. unsignaled_interval > txq_depth.
struct DeadlockError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Stages a simulated message passes through, in pipeline order. Equal-time
/// events sort by (message id, declaration order here).
enum class SimEventKind {
  post_begin,
  post_end,
  busy_post,
  doorbell_mwr_issued,
  nic_arrival,
  net_depart,
  target_arrival,
  target_payload_written,
  ack_arrival,
  completion_mwr_issued,
  completion_visible,
  poll_begin,
  poll_success,
  poll_empty,
};

std::string to_string(SimEventKind kind);

struct SimEvent {
  std::int64_t time_ps = 0;
  std::uint64_t msg_id = 0;  // 0 for events not tied to one message
  SimEventKind kind = SimEventKind::post_begin;

  friend bool operator==(const SimEvent&, const SimEvent&) = default;
};

struct SimResult {
  WorkloadMode mode = WorkloadMode::llp_putbw;
  PipelineConfig config;
  std::vector<std::int64_t> nic_arrival_ps;  // strictly increasing
  std::uint64_t busy_post_count = 0;
  std::uint64_t completions_written = 0;
  std::vector<std::int64_t> one_way_latency_ps;  // per message, ping-pong
  std::vector<SimEvent> events;

  /// Mean delta between consecutive NIC arrivals after dropping the first
  /// `discard_first` arrivals (the queue fill transient).
  double mean_nic_interarrival_ns(std::size_t discard_first = 0) const;
  double mean_one_way_latency_ns() const;

  std::string events_csv() const;  // time_ns,msg_id,event
  std::string summary_json() const;
};

/// Drives one CPU posting n_messages through the post/doorbell/PCIe/network/
/// completion pipeline (llp_putbw or mpi_window workloads). Deterministic:
/// identical inputs give byte-identical event logs.
SimResult simulate_injection(const ComponentTimings& t,
                             const PipelineConfig& cfg,
                             std::uint64_t n_messages);

/// Two nodes exchanging one message back and forth; n_iters round trips.
/// One-way latencies land in SimResult::one_way_latency_ps.
SimResult simulate_pingpong(const ComponentTimings& t,
                            const PipelineConfig& cfg, std::uint64_t n_iters,
                            StackLevel level = StackLevel::llp_only);

/// Renders a run as the PCIe analyzer on the initiator node would have seen
/// it: downstream PIO chunks, upstream completion writes and their ACKs, and
/// inbound payload writes on the ping-pong receive path.
std::vector<TraceRecord> synth_trace(const SimResult& result,
                                     const ComponentTimings& t,
                                     const PipelineConfig& cfg);

}  // namespace msgpath

#endif  // MSGPATH_SIMULATOR_HPP
