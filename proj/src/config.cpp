#include "qkd/config.hpp"

#include <cstdlib>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace qkd {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) {
        return "";
    }
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

[[noreturn]] void bad_key(const std::string& key, const std::string& why) {
    throw std::invalid_argument("config: key '" + key + "' " + why);
}

double to_double(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (value.empty() || end != value.c_str() + value.size()) {
        bad_key(key, "expects a number, got '" + value + "'");
    }
    return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
    if (value.empty() || value[0] == '-') {
        bad_key(key, "expects a non-negative integer, got '" + value + "'");
    }
    char* end = nullptr;
    const std::uint64_t v = std::strtoull(value.c_str(), &end, 10);
    if (end != value.c_str() + value.size()) {
        bad_key(key, "expects a non-negative integer, got '" + value + "'");
    }
    return v;
}

void flatten(const nlohmann::json& node, const std::string& prefix, ConfigEntries& out,
             const std::string& source) {
    if (node.is_object()) {
        for (const auto& [key, child] : node.items()) {
            const std::string name = prefix.empty() ? key : prefix + "." + key;
            flatten(child, name, out, source);
        }
        return;
    }
    if (prefix.empty()) {
        throw std::invalid_argument(source + ": top level must be a JSON object");
    }
    std::string value;
    if (node.is_string()) {
        value = node.get<std::string>();
    } else if (node.is_array()) {
        for (std::size_t i = 0; i < node.size(); ++i) {
            if (i > 0) {
                value += ',';
            }
            const auto& el = node[i];
            value += el.is_string() ? el.get<std::string>() : el.dump();
        }
    } else {
        value = node.dump();
    }
    if (!out.emplace(prefix, value).second) {
        throw std::invalid_argument(source + ": duplicate key '" + prefix + "'");
    }
}

// Tracks which keys a builder consumed so leftovers can be reported.
class EntryReader {
public:
    explicit EntryReader(const ConfigEntries& entries) : entries_(entries) {}

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    const std::string* get(const std::string& key) {
        const auto it = entries_.find(key);
        if (it == entries_.end()) {
            return nullptr;
        }
        consumed_.insert(key);
        return &it->second;
    }

    void reject_leftovers() const {
        for (const auto& [key, value] : entries_) {
            if (consumed_.count(key) == 0) {
                bad_key(key, "is not recognized");
            }
        }
    }

private:
    const ConfigEntries& entries_;
    std::set<std::string> consumed_;
};

SessionConfig build_session_config(EntryReader& reader) {
    SessionConfig cfg;

    if (const auto* v = reader.get("protocol")) {
        if (*v == "bb84") {
            cfg.protocol = ProtocolKind::Bb84;
        } else if (*v == "sarg") {
            cfg.protocol = ProtocolKind::Sarg;
        } else {
            bad_key("protocol", "must be bb84 or sarg, got '" + *v + "'");
        }
    }
    if (const auto* v = reader.get("pulses")) {
        cfg.pulses = to_u64("pulses", *v);
    }
    if (const auto* v = reader.get("seed")) {
        cfg.seed = to_u64("seed", *v);
    }
    if (const auto* v = reader.get("sample_fraction")) {
        cfg.sample_fraction = to_double("sample_fraction", *v);
    }

    std::string source_kind = "wcs";
    if (const auto* v = reader.get("source.kind")) {
        source_kind = *v;
    }
    if (source_kind == "wcs") {
        double mu = 0.1;
        if (const auto* v = reader.get("source.mu")) {
            mu = to_double("source.mu", *v);
        }
        if (reader.has("source.p1") || reader.has("source.p_multi")) {
            bad_key("source.p1/source.p_multi", "requires source.kind = truncated");
        }
        cfg.source = WeakCoherentSource{mu};
    } else if (source_kind == "truncated") {
        double p1 = 1.0;
        double p_multi = 0.0;
        if (const auto* v = reader.get("source.p1")) {
            p1 = to_double("source.p1", *v);
        }
        if (const auto* v = reader.get("source.p_multi")) {
            p_multi = to_double("source.p_multi", *v);
        }
        if (reader.has("source.mu")) {
            bad_key("source.mu", "requires source.kind = wcs");
        }
        cfg.source = TruncatedSource{p1, p_multi};
    } else {
        bad_key("source.kind", "must be wcs or truncated, got '" + source_kind + "'");
    }

    if (const auto* v = reader.get("channel.attenuation_db_per_km")) {
        cfg.channel.attenuation_db_per_km = to_double("channel.attenuation_db_per_km", *v);
    }
    if (const auto* v = reader.get("channel.length_km")) {
        cfg.channel.length_km = to_double("channel.length_km", *v);
    }
    if (const auto* v = reader.get("detector.efficiency")) {
        cfg.detector.efficiency = to_double("detector.efficiency", *v);
    }
    if (const auto* v = reader.get("detector.dark_prob")) {
        cfg.detector.dark_prob = to_double("detector.dark_prob", *v);
    }
    if (const auto* v = reader.get("optics.visibility")) {
        cfg.visibility = to_double("optics.visibility", *v);
    }

    std::string eve_strategy = "none";
    if (const auto* v = reader.get("eve.strategy")) {
        eve_strategy = *v;
    }
    if (eve_strategy == "none") {
        if (reader.has("eve.omega")) {
            bad_key("eve.omega", "requires eve.strategy = intercept_resend");
        }
        cfg.eve = EveStrategy::none();
    } else if (eve_strategy == "intercept_resend") {
        double omega = 1.0;
        if (const auto* v = reader.get("eve.omega")) {
            omega = to_double("eve.omega", *v);
        }
        cfg.eve = EveStrategy::intercept_resend(omega);
    } else if (eve_strategy == "pns") {
        if (reader.has("eve.omega")) {
            bad_key("eve.omega", "requires eve.strategy = intercept_resend");
        }
        cfg.eve = EveStrategy::pns();
    } else {
        bad_key("eve.strategy",
                "must be none, intercept_resend or pns, got '" + eve_strategy + "'");
    }

    if (const auto* v = reader.get("monitor.coincidence_factor")) {
        cfg.coincidence_factor = to_double("monitor.coincidence_factor", *v);
    }
    if (const auto* v = reader.get("monitor.window")) {
        cfg.monitor_window = to_u64("monitor.window", *v);
    }
    if (const auto* v = reader.get("watchdog.tap_fraction")) {
        cfg.watchdog_tap_fraction = to_double("watchdog.tap_fraction", *v);
    }
    if (const auto* v = reader.get("watchdog.nominal_pulse_energy")) {
        cfg.watchdog_nominal_energy = to_double("watchdog.nominal_pulse_energy", *v);
    }
    if (const auto* v = reader.get("watchdog.energy_threshold")) {
        cfg.watchdog_energy_threshold = to_double("watchdog.energy_threshold", *v);
    }
    if (const auto* v = reader.get("analysis.error_correction_f")) {
        cfg.error_correction_f = to_double("analysis.error_correction_f", *v);
    }
    if (const auto* v = reader.get("analysis.leakage_model")) {
        if (*v == "individual") {
            cfg.leakage = LeakageModel::IndividualAttack;
        } else if (*v == "shor_preskill") {
            cfg.leakage = LeakageModel::ShorPreskill;
        } else {
            bad_key("analysis.leakage_model",
                    "must be individual or shor_preskill, got '" + *v + "'");
        }
    }
    return cfg;
}

}  // namespace

ConfigEntries parse_key_value_stream(std::istream& in, const std::string& source) {
    ConfigEntries entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.resize(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument(source + ":" + std::to_string(line_no) +
                                        ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw std::invalid_argument(source + ":" + std::to_string(line_no) +
                                        ": empty key");
        }
        if (!entries.emplace(key, value).second) {
            throw std::invalid_argument(source + ":" + std::to_string(line_no) +
                                        ": duplicate key '" + key + "'");
        }
    }
    return entries;
}

ConfigEntries flatten_json_stream(std::istream& in, const std::string& source) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(source + ": bad JSON: " + e.what());
    }
    if (!j.is_object()) {
        throw std::invalid_argument(source + ": top level must be a JSON object");
    }
    ConfigEntries entries;
    flatten(j, "", entries, source);
    return entries;
}

ConfigEntries load_config_entries(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("config: cannot open '" + path + "'");
    }
    const bool json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
    return json ? flatten_json_stream(in, path) : parse_key_value_stream(in, path);
}

SessionConfig session_config_from_entries(const ConfigEntries& entries) {
    EntryReader reader(entries);
    SessionConfig cfg = build_session_config(reader);
    reader.reject_leftovers();
    cfg.validate();
    return cfg;
}

SessionConfig load_session_config(const std::string& path) {
    return session_config_from_entries(load_config_entries(path));
}

SweepSpec sweep_spec_from_entries(const ConfigEntries& entries) {
    EntryReader reader(entries);
    SweepSpec spec;
    spec.base = build_session_config(reader);

    if (const auto* v = reader.get("sweep.parameter")) {
        spec.parameter = *v;
    } else {
        bad_key("sweep.parameter", "is required");
    }
    if (const auto* v = reader.get("sweep.values")) {
        std::istringstream list(*v);
        std::string item;
        while (std::getline(list, item, ',')) {
            spec.values.push_back(to_double("sweep.values", trim(item)));
        }
        if (spec.values.empty()) {
            bad_key("sweep.values", "must list at least one number");
        }
    } else {
        bad_key("sweep.values", "is required");
    }
    if (const auto* v = reader.get("sweep.trials")) {
        spec.trials = to_u64("sweep.trials", *v);
    }

    reader.reject_leftovers();
    spec.validate();
    return spec;
}

SweepSpec load_sweep_spec(const std::string& path) {
    return sweep_spec_from_entries(load_config_entries(path));
}

}  // namespace qkd
