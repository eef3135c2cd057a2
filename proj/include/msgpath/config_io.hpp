#ifndef MSGPATH_CONFIG_IO_HPP
#define MSGPATH_CONFIG_IO_HPP

#include <stdexcept>
#include <string>
#include <string_view>

#include "msgpath/timings.hpp"

namespace msgpath {

/// Malformed or inconsistent configuration text. Messages carry the
/// offending line number where one exists.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class LoadMode {
  /// Unspecified keys fall back to the shipped reference values.
  overlay_defaults,
  /// Every timing key must be present (net.switch only when
  /// net.has_switch is true) and the rc_to_mem table must be non-empty.
  require_all,
};

/// Parses flat `dotted.key = value` text (ns floats, `#` comments) into a
/// timing set. Unknown keys, negative or non-numeric values, and (in
/// require_all mode) missing keys are reported with line numbers.
ComponentTimings load_timings(std::string_view text,
                              LoadMode mode = LoadMode::overlay_defaults);

ComponentTimings load_timings_file(const std::string& path,
                                   LoadMode mode = LoadMode::overlay_defaults);

/// Emits the full key set in a stable order. Values are written with
/// shortest round-trip precision, so load(emit(t)) == t field-exactly.
std::string emit_config(const ComponentTimings& t);

/// Pipeline parameters use the same line format under a `sim.` prefix
/// (sim.poll_interval, sim.txq_depth, sim.workload_mode, ...).
PipelineConfig load_pipeline_config(std::string_view text);
PipelineConfig load_pipeline_config_file(const std::string& path);
std::string emit_pipeline_config(const PipelineConfig& cfg);

}  // namespace msgpath

#endif  // MSGPATH_CONFIG_IO_HPP
