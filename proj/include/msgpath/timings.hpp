#ifndef MSGPATH_TIMINGS_HPP
#define MSGPATH_TIMINGS_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

namespace msgpath {

/// A non-negative, finite time value in nanoseconds.
class Duration {
 public:
  constexpr Duration() = default;

  explicit Duration(double nanoseconds) : ns_(nanoseconds) {
    if (!(std::isfinite(ns_) && ns_ >= 0.0)) {
      throw std::invalid_argument("Duration must be finite and >= 0 ns, got " +
                                  std::to_string(nanoseconds));
    }
  }

  double ns() const { return ns_; }

  /// Integer picoseconds, the simulator's internal clock unit.
  std::int64_t ps() const { return std::llround(ns_ * 1000.0); }

  Duration& operator+=(Duration other) {
    ns_ += other.ns_;
    return *this;
  }
  friend Duration operator+(Duration a, Duration b) { return a += b; }
  friend Duration operator*(double k, Duration d) { return Duration(k * d.ns_); }
  friend Duration operator*(Duration d, double k) { return Duration(k * d.ns_); }

  friend bool operator==(Duration a, Duration b) { return a.ns_ == b.ns_; }
  friend auto operator<=>(Duration a, Duration b) { return a.ns_ <=> b.ns_; }

 private:
  double ns_ = 0.0;
};

/// Per-step cost of posting one small message through the HW/SW interface:
/// descriptor setup, the two store barriers, the PIO copy to device memory,
/// and the residual (function call overhead, branching).
struct LlpPostBreakdown {
  Duration md_setup;
  Duration barrier_md;
  Duration barrier_dbc;
  Duration pio_copy;
  Duration misc;

  Duration total() const {
    return md_setup + barrier_md + barrier_dbc + pio_copy + misc;
  }
};

/// Per-message bookkeeping costs outside the post/progress calls.
/// per_msg_full is the amortized busy-post cost used at the full-stack level.
struct MiscTimings {
  Duration busy_post;
  Duration measurement_update;
  Duration per_msg_full;
};

/// Costs of the MPI + protocol layers above the transport.
struct HlpTimings {
  Duration isend_mpi;
  Duration isend_proto;
  Duration tx_prog;
  Duration rx_cb_mpi;
  Duration rx_cb_proto;
  Duration rx_post_progress_mpi;

  Duration post_total() const { return isend_mpi + isend_proto; }
  Duration rx_prog_total() const {
    return rx_cb_mpi + rx_cb_proto + rx_post_progress_mpi;
  }
};

/// Root-complex write-to-memory cost, keyed by payload size in bytes.
/// Lookup for an unlisted size takes the nearest listed size at or above it,
/// falling back to the largest listed size when the request exceeds them all.
class RcToMemTable {
 public:
  RcToMemTable() = default;

  void set(std::uint32_t payload_bytes, Duration d) {
    if (payload_bytes == 0) {
      throw std::invalid_argument("rc_to_mem payload size must be positive");
    }
    entries_[payload_bytes] = d;
  }

  bool empty() const { return entries_.empty(); }

  Duration lookup(std::uint32_t payload_bytes) const {
    if (entries_.empty()) {
      throw std::logic_error("rc_to_mem table is empty");
    }
    auto it = entries_.lower_bound(payload_bytes);
    if (it == entries_.end()) {
      return entries_.rbegin()->second;
    }
    return it->second;
  }

  const std::map<std::uint32_t, Duration>& entries() const { return entries_; }

 private:
  std::map<std::uint32_t, Duration> entries_;
};

/// I/O subsystem and interconnect costs. The switch hop only counts when the
/// NICs are connected through one.
struct IoNetworkTimings {
  Duration pcie;
  Duration wire;
  Duration switch_latency;
  bool has_switch = false;
  RcToMemTable rc_to_mem;

  Duration network_total() const {
    return has_switch ? wire + switch_latency : wire;
  }
};

/// The complete per-component timing parameter set the models run on.
struct ComponentTimings {
  LlpPostBreakdown llp_post;
  Duration llp_prog;
  MiscTimings misc;
  HlpTimings hlp;
  IoNetworkTimings io_net;

  Duration llp_post_total() const { return llp_post.total(); }
  Duration misc_inj_total() const {
    return misc.busy_post + misc.measurement_update;
  }
  Duration hlp_post_total() const { return hlp.post_total(); }
  Duration hlp_rx_prog_total() const { return hlp.rx_prog_total(); }
  Duration network_total() const { return io_net.network_total(); }
  Duration rc_to_mem(std::uint32_t payload_bytes) const {
    return io_net.rc_to_mem.lookup(payload_bytes);
  }
};

/// The measured component set of the reference ThunderX2 + ConnectX-4 system;
/// identical to configs/tx2_cx4.cfg.
ComponentTimings reference_timings();

enum class WorkloadMode { llp_putbw, llp_pingpong, mpi_window };

std::string to_string(WorkloadMode mode);
WorkloadMode workload_mode_from_string(const std::string& name);

/// Queue, polling, and completion parameters of the simulated transport.
struct PipelineConfig {
  std::uint32_t poll_interval = 16;       // posts between CQ polls (putbw)
  std::uint32_t poll_batch = 1;           // completions dequeued per poll
  std::uint32_t txq_depth = 64;
  std::uint32_t unsignaled_interval = 1;  // NIC writes one CQE every c posts
  std::optional<std::uint32_t> rc_credits;  // nullopt = unlimited
  std::uint32_t message_size_bytes = 8;
  std::uint32_t completion_size_bytes = 64;
  WorkloadMode workload = WorkloadMode::llp_putbw;
  Duration nic_service;  // hardware turnaround inside a NIC, normally 0

  void validate() const {
    if (poll_interval == 0) throw std::invalid_argument("poll_interval must be >= 1");
    if (poll_batch == 0) throw std::invalid_argument("poll_batch must be >= 1");
    if (txq_depth == 0) throw std::invalid_argument("txq_depth must be >= 1");
    if (poll_batch > txq_depth) {
      throw std::invalid_argument("poll_batch must not exceed txq_depth");
    }
    if (unsignaled_interval == 0) {
      throw std::invalid_argument("unsignaled_interval must be >= 1");
    }
    if (rc_credits && *rc_credits == 0) {
      throw std::invalid_argument("rc_credits must be positive when finite");
    }
    if (message_size_bytes == 0) {
      throw std::invalid_argument("message_size_bytes must be positive");
    }
    if (completion_size_bytes == 0) {
      throw std::invalid_argument("completion_size_bytes must be positive");
    }
  }
};

}  // namespace msgpath

#endif  // MSGPATH_TIMINGS_HPP
