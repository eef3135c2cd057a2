#include "msgpath/config_io.hpp"

#include <array>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace msgpath {

namespace {

struct ScalarKey {
  std::string_view key;
  Duration& (*field)(ComponentTimings&);
};

// Order here is the emit order.
constexpr std::array<ScalarKey, 17> kScalarKeys{{
    {"llp_post.md_setup", [](ComponentTimings& t) -> Duration& { return t.llp_post.md_setup; }},
    {"llp_post.barrier_md", [](ComponentTimings& t) -> Duration& { return t.llp_post.barrier_md; }},
    {"llp_post.barrier_dbc", [](ComponentTimings& t) -> Duration& { return t.llp_post.barrier_dbc; }},
    {"llp_post.pio_copy", [](ComponentTimings& t) -> Duration& { return t.llp_post.pio_copy; }},
    {"llp_post.misc", [](ComponentTimings& t) -> Duration& { return t.llp_post.misc; }},
    {"llp_prog", [](ComponentTimings& t) -> Duration& { return t.llp_prog; }},
    {"misc.busy_post", [](ComponentTimings& t) -> Duration& { return t.misc.busy_post; }},
    {"misc.measurement_update", [](ComponentTimings& t) -> Duration& { return t.misc.measurement_update; }},
    {"misc.per_msg_full", [](ComponentTimings& t) -> Duration& { return t.misc.per_msg_full; }},
    {"hlp.isend_mpi", [](ComponentTimings& t) -> Duration& { return t.hlp.isend_mpi; }},
    {"hlp.isend_proto", [](ComponentTimings& t) -> Duration& { return t.hlp.isend_proto; }},
    {"hlp.tx_prog", [](ComponentTimings& t) -> Duration& { return t.hlp.tx_prog; }},
    {"hlp.rx_cb_mpi", [](ComponentTimings& t) -> Duration& { return t.hlp.rx_cb_mpi; }},
    {"hlp.rx_cb_proto", [](ComponentTimings& t) -> Duration& { return t.hlp.rx_cb_proto; }},
    {"hlp.rx_post_progress_mpi", [](ComponentTimings& t) -> Duration& { return t.hlp.rx_post_progress_mpi; }},
    {"io.pcie", [](ComponentTimings& t) -> Duration& { return t.io_net.pcie; }},
    {"net.wire", [](ComponentTimings& t) -> Duration& { return t.io_net.wire; }},
}};

constexpr std::string_view kSwitchKey = "net.switch";
constexpr std::string_view kHasSwitchKey = "net.has_switch";
constexpr std::string_view kRcToMemPrefix = "io.rc_to_mem.";

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
  throw ConfigError("line " + std::to_string(line_no) + ": " + what);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_double(std::string_view value, std::size_t line_no) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    fail(line_no, "expected a number, got '" + std::string(value) + "'");
  }
  return out;
}

Duration parse_duration(std::string_view value, std::size_t line_no) {
  double ns = parse_double(value, line_no);
  if (!(ns >= 0.0)) {
    fail(line_no, "negative duration " + std::string(value) + " ns");
  }
  try {
    return Duration(ns);
  } catch (const std::invalid_argument& e) {
    fail(line_no, e.what());
  }
}

bool parse_bool(std::string_view value, std::size_t line_no) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  fail(line_no, "expected true/false, got '" + std::string(value) + "'");
}

std::uint64_t parse_uint(std::string_view value, std::size_t line_no) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    fail(line_no, "expected a non-negative integer, got '" + std::string(value) + "'");
  }
  return out;
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

// Splits config text into (line_no, key, value) triples, skipping blanks
// and # comments.
void for_each_kv(std::string_view text,
                 const std::function<void(std::size_t, std::string_view,
                                          std::string_view)>& visit) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line = (eol == std::string_view::npos)
                                ? text.substr(pos)
                                : text.substr(pos, eol - pos);
    pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
    ++line_no;

    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;

    std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      fail(line_no, "expected 'key = value'");
    }
    std::string_view key = trim(line.substr(0, eq));
    std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) fail(line_no, "empty key");
    if (value.empty()) fail(line_no, "empty value for key '" + std::string(key) + "'");
    visit(line_no, key, value);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open '" + path + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

ComponentTimings load_timings(std::string_view text, LoadMode mode) {
  ComponentTimings t;
  bool rc_table_given = false;
  if (mode == LoadMode::overlay_defaults) {
    t = reference_timings();
  }

  std::set<std::string, std::less<>> seen;
  bool has_switch_given = false;

  for_each_kv(text, [&](std::size_t line_no, std::string_view key,
                        std::string_view value) {
    if (!seen.emplace(key).second) {
      fail(line_no, "duplicate key '" + std::string(key) + "'");
    }
    for (const auto& sk : kScalarKeys) {
      if (key == sk.key) {
        sk.field(t) = parse_duration(value, line_no);
        return;
      }
    }
    if (key == kSwitchKey) {
      t.io_net.switch_latency = parse_duration(value, line_no);
      return;
    }
    if (key == kHasSwitchKey) {
      t.io_net.has_switch = parse_bool(value, line_no);
      has_switch_given = true;
      return;
    }
    if (key.starts_with(kRcToMemPrefix)) {
      std::string_view size_str = key.substr(kRcToMemPrefix.size());
      std::uint64_t size = parse_uint(size_str, line_no);
      if (size == 0 || size > UINT32_MAX) {
        fail(line_no, "rc_to_mem size out of range: '" + std::string(size_str) + "'");
      }
      if (!rc_table_given) {
        // First explicit entry replaces the default table entirely.
        t.io_net.rc_to_mem = RcToMemTable();
        rc_table_given = true;
      }
      t.io_net.rc_to_mem.set(static_cast<std::uint32_t>(size),
                             parse_duration(value, line_no));
      return;
    }
    fail(line_no, "unknown key '" + std::string(key) + "'");
  });

  if (mode == LoadMode::require_all) {
    for (const auto& sk : kScalarKeys) {
      if (!seen.contains(sk.key)) {
        throw ConfigError("missing required key '" + std::string(sk.key) + "'");
      }
    }
    if (!has_switch_given) {
      t.io_net.has_switch = seen.contains(kSwitchKey);
    }
    if (t.io_net.has_switch && !seen.contains(kSwitchKey)) {
      throw ConfigError("missing required key 'net.switch' (net.has_switch is true)");
    }
    if (!rc_table_given) {
      throw ConfigError("missing required key 'io.rc_to_mem.<size>' (at least one entry)");
    }
  }
  return t;
}

ComponentTimings load_timings_file(const std::string& path, LoadMode mode) {
  try {
    return load_timings(read_file(path), mode);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string emit_config(const ComponentTimings& t) {
  ComponentTimings copy = t;
  std::ostringstream out;
  out << "# msgpath component timings (nanoseconds)\n";
  for (const auto& sk : kScalarKeys) {
    out << sk.key << " = " << format_double(sk.field(copy).ns()) << "\n";
  }
  out << kSwitchKey << " = " << format_double(t.io_net.switch_latency.ns()) << "\n";
  out << kHasSwitchKey << " = " << (t.io_net.has_switch ? "true" : "false") << "\n";
  for (const auto& [size, dur] : t.io_net.rc_to_mem.entries()) {
    out << kRcToMemPrefix << size << " = " << format_double(dur.ns()) << "\n";
  }
  return out.str();
}

PipelineConfig load_pipeline_config(std::string_view text) {
  PipelineConfig cfg;
  for_each_kv(text, [&](std::size_t line_no, std::string_view key,
                        std::string_view value) {
    if (key == "sim.poll_interval") {
      cfg.poll_interval = static_cast<std::uint32_t>(parse_uint(value, line_no));
    } else if (key == "sim.poll_batch") {
      cfg.poll_batch = static_cast<std::uint32_t>(parse_uint(value, line_no));
    } else if (key == "sim.txq_depth") {
      cfg.txq_depth = static_cast<std::uint32_t>(parse_uint(value, line_no));
    } else if (key == "sim.unsignaled_interval") {
      cfg.unsignaled_interval = static_cast<std::uint32_t>(parse_uint(value, line_no));
    } else if (key == "sim.rc_credits") {
      std::uint64_t v = parse_uint(value, line_no);
      if (v == 0) {
        cfg.rc_credits.reset();  // 0 means unlimited
      } else {
        cfg.rc_credits = static_cast<std::uint32_t>(v);
      }
    } else if (key == "sim.message_size") {
      cfg.message_size_bytes = static_cast<std::uint32_t>(parse_uint(value, line_no));
    } else if (key == "sim.completion_size") {
      cfg.completion_size_bytes = static_cast<std::uint32_t>(parse_uint(value, line_no));
    } else if (key == "sim.workload_mode") {
      try {
        cfg.workload = workload_mode_from_string(std::string(value));
      } catch (const std::invalid_argument& e) {
        fail(line_no, e.what());
      }
    } else if (key == "sim.nic_service_ns") {
      cfg.nic_service = parse_duration(value, line_no);
    } else {
      fail(line_no, "unknown key '" + std::string(key) + "'");
    }
  });
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

PipelineConfig load_pipeline_config_file(const std::string& path) {
  try {
    return load_pipeline_config(read_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string emit_pipeline_config(const PipelineConfig& cfg) {
  std::ostringstream out;
  out << "# msgpath pipeline parameters\n";
  out << "sim.poll_interval = " << cfg.poll_interval << "\n";
  out << "sim.poll_batch = " << cfg.poll_batch << "\n";
  out << "sim.txq_depth = " << cfg.txq_depth << "\n";
  out << "sim.unsignaled_interval = " << cfg.unsignaled_interval << "\n";
  out << "sim.rc_credits = " << (cfg.rc_credits ? *cfg.rc_credits : 0u) << "\n";
  out << "sim.message_size = " << cfg.message_size_bytes << "\n";
  out << "sim.completion_size = " << cfg.completion_size_bytes << "\n";
  out << "sim.workload_mode = " << to_string(cfg.workload) << "\n";
  out << "sim.nic_service_ns = " << format_double(cfg.nic_service.ns()) << "\n";
  return out.str();
}

}  // namespace msgpath
