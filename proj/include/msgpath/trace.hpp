#ifndef MSGPATH_TRACE_HPP
#define MSGPATH_TRACE_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "msgpath/timings.hpp"

namespace msgpath {

struct TraceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when an estimator cannot find usable transaction pairs, when
/// MWr/ACK matching is ambiguous, or when a derived value comes out negative.
struct EstimationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// down = toward the NIC (RC to endpoint), up = toward the root complex.
enum class Direction { down, up };

enum class TlpKind { MWr, MRd, CplD, ACK, UpdateFC };

std::string to_string(Direction d);
std::string to_string(TlpKind k);

/// One timestamped transaction or DLLP as seen by an analyzer sitting just
/// before the NIC. DLLPs (ACK, UpdateFC) carry no payload.
struct TraceRecord {
  std::int64_t timestamp_ps = 0;
  Direction direction = Direction::down;
  TlpKind kind = TlpKind::MWr;
  std::uint32_t payload_bytes = 0;
  std::string tag;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

/// Parses the trace CSV (header `timestamp_ns,direction,tlp_type,
/// payload_bytes,tag`; timestamps are ns with up to 3 fractional digits).
/// Rows may arrive out of order; the result is stably sorted by timestamp.
std::vector<TraceRecord> parse_trace(std::string_view text);
std::vector<TraceRecord> parse_trace_file(const std::string& path);

std::string records_to_csv(const std::vector<TraceRecord>& records);

struct IntervalStats {
  std::size_t count = 0;
  double mean_ns = 0.0;
  double median_ns = 0.0;
  double p25_ns = 0.0;
  double p75_ns = 0.0;
  double min_ns = 0.0;
  double max_ns = 0.0;
};

/// Which records count as message arrivals. Multi-chunk PIO posts show up as
/// bursts of matching records; chunks closer than chunk_gap_ns collapse into
/// the burst's first timestamp.
struct InjectionFilter {
  Direction direction = Direction::down;
  TlpKind kind = TlpKind::MWr;
  std::uint32_t payload_bytes = 64;
  double chunk_gap_ns = 5.0;
};

/// Distribution of deltas between consecutive filtered arrivals, i.e. the
/// observed injection overhead. Needs at least two matching arrivals.
IntervalStats injection_interval_stats(const std::vector<TraceRecord>& records,
                                       const InjectionFilter& filter = {});

/// Half the mean gap between a NIC-initiated upstream MWr and the ACK DLLP
/// answering it. Two unanswered MWr in flight make the greedy pairing
/// ambiguous and raise EstimationError.
Duration estimate_pcie(const std::vector<TraceRecord>& records);

/// Half the mean gap between an outgoing 64-byte MWr (ping) and the next
/// upstream 64-byte MWr (its completion) in a ping-pong trace.
Duration estimate_network(const std::vector<TraceRecord>& records,
                          double chunk_gap_ns = 5.0);

struct RcToMemKnowns {
  Duration pcie;
  Duration llp_post_total;
  Duration llp_prog;
};

/// Mean inbound-pong to outbound-ping gap minus the known components
/// (2 PCIe traversals, one poll, one post) leaves the RC's write to memory.
Duration estimate_rc_to_mem(const std::vector<TraceRecord>& records,
                            const RcToMemKnowns& knowns,
                            std::uint32_t msg_size_bytes = 8,
                            double chunk_gap_ns = 5.0);

/// Switch hop cost from two latency measurements, one through a switch and
/// one NIC-to-NIC. A negative difference is an estimation inconsistency.
Duration estimate_switch(Duration latency_with_switch, Duration latency_direct);

}  // namespace msgpath

#endif  // MSGPATH_TRACE_HPP
