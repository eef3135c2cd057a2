#include "msgpath/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace msgpath {

std::string to_string(Direction d) {
  return d == Direction::down ? "down" : "up";
}

std::string to_string(TlpKind k) {
  switch (k) {
    case TlpKind::MWr: return "MWr";
    case TlpKind::MRd: return "MRd";
    case TlpKind::CplD: return "CplD";
    case TlpKind::ACK: return "ACK";
    case TlpKind::UpdateFC: return "UpdateFC";
  }
  throw std::logic_error("unreachable TLP kind");
}

namespace {

constexpr std::string_view kHeader = "timestamp_ns,direction,tlp_type,payload_bytes,tag";

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
  throw TraceError("line " + std::to_string(line_no) + ": " + what);
}

Direction parse_direction(std::string_view s, std::size_t line_no) {
  if (s == "down") return Direction::down;
  if (s == "up") return Direction::up;
  fail(line_no, "unknown direction '" + std::string(s) + "'");
}

TlpKind parse_kind(std::string_view s, std::size_t line_no) {
  if (s == "MWr") return TlpKind::MWr;
  if (s == "MRd") return TlpKind::MRd;
  if (s == "CplD") return TlpKind::CplD;
  if (s == "ACK") return TlpKind::ACK;
  if (s == "UpdateFC") return TlpKind::UpdateFC;
  fail(line_no, "unknown tlp_type '" + std::string(s) + "'");
}

// Timestamps are decimal ns with up to 3 fractional digits; stored exactly
// as integer picoseconds.
std::int64_t parse_timestamp_ps(std::string_view s, std::size_t line_no) {
  if (s.empty() || s.front() == '-') {
    fail(line_no, "timestamp must be a non-negative ns value");
  }
  std::string_view whole = s;
  std::string_view frac;
  if (auto dot = s.find('.'); dot != std::string_view::npos) {
    whole = s.substr(0, dot);
    frac = s.substr(dot + 1);
  }
  if (whole.empty() && frac.empty()) fail(line_no, "empty timestamp");
  std::int64_t ns_part = 0;
  if (!whole.empty()) {
    auto [ptr, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), ns_part);
    if (ec != std::errc() || ptr != whole.data() + whole.size()) {
      fail(line_no, "bad timestamp '" + std::string(s) + "'");
    }
  }
  if (frac.size() > 3) {
    fail(line_no, "timestamp has more than 3 fractional digits: '" + std::string(s) + "'");
  }
  std::int64_t frac_ps = 0;
  if (!frac.empty()) {
    auto [ptr, ec] = std::from_chars(frac.data(), frac.data() + frac.size(), frac_ps);
    if (ec != std::errc() || ptr != frac.data() + frac.size()) {
      fail(line_no, "bad timestamp '" + std::string(s) + "'");
    }
    for (std::size_t i = frac.size(); i < 3; ++i) frac_ps *= 10;
  }
  return ns_part * 1000 + frac_ps;
}

std::string format_ns(std::int64_t ps) {
  std::int64_t whole = ps / 1000;
  std::int64_t frac = ps % 1000;
  char buf[48];
  if (frac == 0) {
    std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(whole));
    return buf;
  }
  std::snprintf(buf, sizeof(buf), "%lld.%03lld", static_cast<long long>(whole),
                static_cast<long long>(frac));
  std::string s(buf);
  while (s.back() == '0') s.pop_back();
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

// Collapses bursts of matching arrivals (PIO chunks of one post) into the
// burst's first timestamp.
std::vector<std::int64_t> filtered_arrivals(const std::vector<TraceRecord>& records,
                                            const InjectionFilter& filter) {
  const std::int64_t gap_ps = Duration(filter.chunk_gap_ns).ps();
  std::vector<std::int64_t> arrivals;
  std::int64_t last_raw = 0;
  bool have_last = false;
  for (const auto& r : records) {
    if (r.direction != filter.direction || r.kind != filter.kind ||
        r.payload_bytes != filter.payload_bytes) {
      continue;
    }
    if (have_last && r.timestamp_ps - last_raw <= gap_ps) {
      last_raw = r.timestamp_ps;  // same burst
      continue;
    }
    arrivals.push_back(r.timestamp_ps);
    last_raw = r.timestamp_ps;
    have_last = true;
  }
  return arrivals;
}

double percentile(const std::vector<double>& sorted, double q) {
  if (sorted.size() == 1) return sorted.front();
  double rank = q * static_cast<double>(sorted.size() - 1);
  auto lo = static_cast<std::size_t>(rank);
  if (lo + 1 >= sorted.size()) return sorted.back();
  double w = rank - static_cast<double>(lo);
  return sorted[lo] * (1.0 - w) + sorted[lo + 1] * w;
}

}  // namespace

std::vector<TraceRecord> parse_trace(std::string_view text) {
  std::vector<TraceRecord> records;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line = (eol == std::string_view::npos)
                                ? text.substr(pos)
                                : text.substr(pos, eol - pos);
    pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    if (!header_seen) {
      if (line != kHeader) {
        fail(line_no, "expected header '" + std::string(kHeader) + "'");
      }
      header_seen = true;
      continue;
    }

    auto fields = split_fields(line);
    if (fields.size() != 5) {
      fail(line_no, "expected 5 comma-separated fields, got " +
                        std::to_string(fields.size()));
    }
    TraceRecord r;
    r.timestamp_ps = parse_timestamp_ps(fields[0], line_no);
    r.direction = parse_direction(fields[1], line_no);
    r.kind = parse_kind(fields[2], line_no);
    std::uint32_t payload = 0;
    auto [ptr, ec] = std::from_chars(fields[3].data(),
                                     fields[3].data() + fields[3].size(), payload);
    if (ec != std::errc() || ptr != fields[3].data() + fields[3].size()) {
      fail(line_no, "bad payload_bytes '" + std::string(fields[3]) + "'");
    }
    r.payload_bytes = payload;
    if ((r.kind == TlpKind::ACK || r.kind == TlpKind::UpdateFC) && payload != 0) {
      fail(line_no, "DLLPs carry no payload");
    }
    r.tag = std::string(fields[4]);
    records.push_back(std::move(r));
  }
  if (!header_seen) {
    throw TraceError("empty trace: missing header line");
  }
  std::stable_sort(records.begin(), records.end(),
                   [](const TraceRecord& a, const TraceRecord& b) {
                     return a.timestamp_ps < b.timestamp_ps;
                   });
  return records;
}

std::vector<TraceRecord> parse_trace_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw TraceError("cannot open '" + path + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_trace(ss.str());
  } catch (const TraceError& e) {
    throw TraceError(path + ": " + e.what());
  }
}

std::string records_to_csv(const std::vector<TraceRecord>& records) {
  std::ostringstream out;
  out << kHeader << '\n';
  for (const auto& r : records) {
    out << format_ns(r.timestamp_ps) << ',' << to_string(r.direction) << ','
        << to_string(r.kind) << ',' << r.payload_bytes << ',' << r.tag << '\n';
  }
  return out.str();
}

IntervalStats injection_interval_stats(const std::vector<TraceRecord>& records,
                                       const InjectionFilter& filter) {
  auto arrivals = filtered_arrivals(records, filter);
  if (arrivals.size() < 2) {
    throw EstimationError("need at least 2 matching arrivals, found " +
                          std::to_string(arrivals.size()));
  }
  std::vector<double> deltas;
  deltas.reserve(arrivals.size() - 1);
  for (std::size_t i = 1; i < arrivals.size(); ++i) {
    deltas.push_back(static_cast<double>(arrivals[i] - arrivals[i - 1]) / 1000.0);
  }
  std::sort(deltas.begin(), deltas.end());

  IntervalStats stats;
  stats.count = deltas.size();
  double sum = 0.0;
  for (double d : deltas) sum += d;
  stats.mean_ns = sum / static_cast<double>(deltas.size());
  stats.min_ns = deltas.front();
  stats.max_ns = deltas.back();
  stats.p25_ns = percentile(deltas, 0.25);
  stats.median_ns = percentile(deltas, 0.50);
  stats.p75_ns = percentile(deltas, 0.75);
  return stats;
}

Duration estimate_pcie(const std::vector<TraceRecord>& records) {
  bool pending = false;
  std::int64_t pending_mwr_ps = 0;
  std::vector<double> half_rtts;
  for (const auto& r : records) {
    if (r.direction == Direction::up && r.kind == TlpKind::MWr) {
      if (pending) {
        throw EstimationError(
            "two NIC-initiated MWr before an ACK; pairing is ambiguous");
      }
      pending = true;
      pending_mwr_ps = r.timestamp_ps;
    } else if (r.direction == Direction::down && r.kind == TlpKind::ACK) {
      if (pending) {
        half_rtts.push_back(
            static_cast<double>(r.timestamp_ps - pending_mwr_ps) / 2000.0);
        pending = false;
      }
    }
  }
  if (half_rtts.empty()) {
    throw EstimationError("no NIC-initiated MWr/ACK pair in trace");
  }
  double sum = 0.0;
  for (double v : half_rtts) sum += v;
  return Duration(sum / static_cast<double>(half_rtts.size()));
}

Duration estimate_network(const std::vector<TraceRecord>& records,
                          double chunk_gap_ns) {
  InjectionFilter down_filter;
  down_filter.chunk_gap_ns = chunk_gap_ns;
  auto pings = filtered_arrivals(records, down_filter);

  std::vector<double> half_rtts;
  std::size_t ping_idx = 0;
  for (const auto& r : records) {
    if (ping_idx >= pings.size()) break;
    if (r.direction == Direction::up && r.kind == TlpKind::MWr &&
        r.payload_bytes == 64 && r.timestamp_ps >= pings[ping_idx]) {
      half_rtts.push_back(
          static_cast<double>(r.timestamp_ps - pings[ping_idx]) / 2000.0);
      // Skip pings already overtaken by this completion.
      while (ping_idx < pings.size() && pings[ping_idx] <= r.timestamp_ps) {
        ++ping_idx;
      }
    }
  }
  if (half_rtts.empty()) {
    throw EstimationError("no ping/completion pair in trace");
  }
  double sum = 0.0;
  for (double v : half_rtts) sum += v;
  return Duration(sum / static_cast<double>(half_rtts.size()));
}

Duration estimate_rc_to_mem(const std::vector<TraceRecord>& records,
                            const RcToMemKnowns& knowns,
                            std::uint32_t msg_size_bytes, double chunk_gap_ns) {
  // Inbound pongs: upstream payload-sized MWr. Outgoing pings: downstream
  // 64-byte MWr bursts.
  InjectionFilter down_filter;
  down_filter.chunk_gap_ns = chunk_gap_ns;
  auto pings = filtered_arrivals(records, down_filter);

  std::vector<double> deltas;
  std::size_t ping_idx = 0;
  for (const auto& r : records) {
    if (r.direction != Direction::up || r.kind != TlpKind::MWr ||
        r.payload_bytes != msg_size_bytes) {
      continue;
    }
    while (ping_idx < pings.size() && pings[ping_idx] <= r.timestamp_ps) {
      ++ping_idx;
    }
    if (ping_idx >= pings.size()) break;
    deltas.push_back(
        static_cast<double>(pings[ping_idx] - r.timestamp_ps) / 1000.0);
  }
  if (deltas.empty()) {
    throw EstimationError("no inbound-pong/outgoing-ping pair in trace");
  }
  double sum = 0.0;
  for (double v : deltas) sum += v;
  double mean_delta = sum / static_cast<double>(deltas.size());
  double rc = mean_delta - 2.0 * knowns.pcie.ns() - knowns.llp_prog.ns() -
              knowns.llp_post_total.ns();
  if (rc < 0.0) {
    if (rc < -1e-9) {
      throw EstimationError(
          "pong-to-ping delta is smaller than the known components "
          "(estimation inconsistency)");
    }
    rc = 0.0;  // rounding residue on an exact cancellation
  }
  return Duration(rc);
}

Duration estimate_switch(Duration latency_with_switch, Duration latency_direct) {
  if (latency_with_switch.ns() <= 0.0 || latency_direct.ns() <= 0.0) {
    throw std::invalid_argument("latencies must be positive");
  }
  double diff = latency_with_switch.ns() - latency_direct.ns();
  if (diff < 0.0) {
    throw EstimationError(
        "switched latency is below the direct latency (estimation "
        "inconsistency)");
  }
  return Duration(diff);
}

}  // namespace msgpath
