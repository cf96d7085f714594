#pragma once

#include <iosfwd>
#include <map>
#include <string>

#include "qkd/analysis.hpp"
#include "qkd/protocols.hpp"

namespace qkd {

// Flat dotted-key -> string map, the common denominator of both config
// syntaxes. `source` names the file/stream in diagnostics.
using ConfigEntries = std::map<std::string, std::string>;

// key = value lines; '#' starts a comment, blank lines are skipped,
// duplicate keys are an error.
ConfigEntries parse_key_value_stream(std::istream& in, const std::string& source);

// JSON object, arbitrarily nested; nesting flattens to dotted keys
// ("source": {"mu": 0.1} -> source.mu). Arrays become comma-joined lists.
ConfigEntries flatten_json_stream(std::istream& in, const std::string& source);

// Dispatch on extension: .json -> JSON, anything else -> key = value.
ConfigEntries load_config_entries(const std::string& path);

// Build and validate a session config. Unknown keys and keys that do not
// apply to the selected source kind / eavesdropping strategy are errors
// naming the offending key.
//
// Recognized keys: protocol, pulses, seed, sample_fraction, source.kind,
// source.mu, source.p1, source.p_multi, channel.attenuation_db_per_km,
// channel.length_km, detector.efficiency, detector.dark_prob,
// optics.visibility, eve.strategy, eve.omega, monitor.coincidence_factor,
// monitor.window, watchdog.tap_fraction, watchdog.nominal_pulse_energy,
// watchdog.energy_threshold, analysis.error_correction_f,
// analysis.leakage_model.
SessionConfig session_config_from_entries(const ConfigEntries& entries);
SessionConfig load_session_config(const std::string& path);

// Sweep file: the session keys above plus sweep.parameter, sweep.values
// (comma-separated numbers) and sweep.trials.
SweepSpec sweep_spec_from_entries(const ConfigEntries& entries);
SweepSpec load_sweep_spec(const std::string& path);

}  // namespace qkd
