#include "qkd/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qkd/analysis.hpp"
#include "qkd/config.hpp"
#include "qkd/protocols.hpp"
#include "qkd/record_io.hpp"
#include "qkd/selftest.hpp"

namespace qkd {

namespace {

constexpr const char* kKeyRateColumns =
    "value,detection_rate,detection_rate_se,sifted_rate,sifted_rate_se,qber,qber_se,"
    "i_ab,i_ae,secret_rate,secret_rate_se,alarms";
constexpr const char* kCurveColumns = "d,i_ab,i_ae,rate_individual,rate_shor_preskill";

// QKDSIM_SEED overrides whatever the config file says.
void apply_seed_override(std::uint64_t& seed) {
    const char* env = std::getenv("QKDSIM_SEED");
    if (env == nullptr || *env == '\0') {
        return;
    }
    char* end = nullptr;
    const std::uint64_t value = std::strtoull(env, &end, 10);
    if (*end != '\0' || env[0] == '-') {
        throw std::invalid_argument("QKDSIM_SEED must be a non-negative integer");
    }
    seed = value;
}

std::string describe_source(const PhotonSource& source) {
    if (const auto* wcs = std::get_if<WeakCoherentSource>(&source)) {
        return "wcs mu=" + format_g9(wcs->mu);
    }
    const auto& t = std::get<TruncatedSource>(source);
    return "truncated p1=" + format_g9(t.p1) + " p_multi=" + format_g9(t.p_multi);
}

std::string describe_eve(const EveStrategy& eve) {
    switch (eve.kind) {
        case EveKind::None:
            return "none";
        case EveKind::InterceptResend:
            return "intercept_resend omega=" + format_g9(eve.omega);
        case EveKind::Pns:
            return "pns";
    }
    return "?";
}

void print_summary(std::ostream& out, const SessionConfig& cfg, const SessionResult& r) {
    const auto yesno = [](bool b) { return b ? "yes" : "no"; };
    out << "protocol = " << to_string(cfg.protocol) << '\n'
        << "pulses = " << r.pulses_sent << '\n'
        << "seed = " << cfg.seed << '\n'
        << "source = " << describe_source(cfg.source) << '\n'
        << "channel = " << format_g9(cfg.channel.attenuation_db_per_km) << " dB/km x "
        << format_g9(cfg.channel.length_km) << " km\n"
        << "eve = " << describe_eve(cfg.eve) << '\n'
        << "detections = " << r.bob_detections << '\n'
        << "detection_rate = " << format_g9(r.detection_rate) << '\n'
        << "double_clicks = " << r.double_clicks << '\n'
        << "sifted = " << r.sifted_length << '\n'
        << "sifted_rate = " << format_g9(r.sifted_rate) << '\n'
        << "disclosed = " << r.disclosed_count << '\n'
        << "remaining_key = " << r.remaining_key_length << '\n'
        << "qber = " << format_g9(r.qber) << '\n'
        << "qber_se = " << format_g9(r.qber_std_error) << '\n'
        << "qber_above_individual_threshold = " << yesno(r.qber_above_individual_threshold)
        << '\n'
        << "qber_above_shor_preskill_threshold = "
        << yesno(r.qber_above_shor_preskill_threshold) << '\n'
        << "coincidence_alarm = " << yesno(r.coincidence_alarm) << '\n'
        << "eve_stored_pulses = " << r.eve_stored_pulses << '\n'
        << "eve_known_sifted_bits = " << r.eve_known_sifted_bits << '\n'
        << "eve_info_per_sifted_bit = " << format_g9(r.eve_info_per_sifted_bit) << '\n'
        << "eve_guess_accuracy = " << format_g9(r.eve_guess_accuracy) << '\n'
        << "secret_rate_individual = " << format_g9(r.secret_rate_individual) << '\n'
        << "secret_rate_shor_preskill = " << format_g9(r.secret_rate_shor_preskill) << '\n';
}

int do_simulate(const std::string& config_path, const std::string& records_path) {
    SessionConfig cfg = load_session_config(config_path);
    apply_seed_override(cfg.seed);

    std::ofstream records_out;
    RecordSink sink;
    if (!records_path.empty()) {
        records_out.open(records_path, std::ios::binary);
        if (!records_out) {
            throw std::invalid_argument("cannot open record log '" + records_path + "'");
        }
        sink = [&records_out](const PulseRecord& rec) {
            records_out << serialize_record(rec) << '\n';
        };
    }

    SessionResult result = run_session(cfg, cfg.eve, RandomStream(cfg.seed), sink);
    attach_key_rates(result, cfg.error_correction_f);
    print_summary(std::cout, cfg, result);
    return result.any_alarm() ? 2 : 0;
}

int do_sweep(const std::string& spec_path, const std::string& out_path) {
    SweepSpec spec = load_sweep_spec(spec_path);
    apply_seed_override(spec.base.seed);
    const KeyRateReport report = run_sweep(spec);
    if (out_path.empty()) {
        write_key_rate_csv(std::cout, report);
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) {
            throw std::invalid_argument("cannot open output file '" + out_path + "'");
        }
        write_key_rate_csv(out, report);
    }
    return 0;
}

int do_curves(double dmax, std::size_t steps, const std::string& out_path) {
    if (out_path.empty()) {
        write_attack_curves_csv(std::cout, dmax, steps);
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) {
            throw std::invalid_argument("cannot open output file '" + out_path + "'");
        }
        write_attack_curves_csv(out, dmax, steps);
    }
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"qkdsim - discrete-event quantum key distribution simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string records_path;
    auto* simulate = app.add_subcommand(
        "simulate", "Run one session and print a key = value summary "
                    "(exit 0; 2 when a monitor alarm fires)");
    simulate->add_option("--config", config_path, "session config (key = value or .json)")
        ->required();
    simulate->add_option("--records", records_path,
                         "write the per-pulse record log (one JSON object per line)");

    std::string spec_path;
    std::string sweep_out;
    auto* sweep = app.add_subcommand(
        "sweep", std::string("Sweep one parameter and write a CSV report with columns ") +
                     kKeyRateColumns);
    sweep->add_option("--spec", spec_path, "sweep spec (session keys plus sweep.*)")
        ->required();
    sweep->add_option("--out", sweep_out, "output CSV path (default: stdout)");

    double dmax = 0.25;
    std::size_t steps = 100;
    std::string curves_out;
    auto* curves = app.add_subcommand(
        "curves", std::string("Tabulate the security curves; CSV columns ") + kCurveColumns);
    curves->add_option("--dmax", dmax, "largest disturbance (default 0.25)");
    curves->add_option("--steps", steps, "number of grid intervals (default 100)");
    curves->add_option("--out", curves_out, "output CSV path (default: stdout)");

    auto* selftest = app.add_subcommand(
        "selftest", "Run the built-in acceptance battery; exit 0 when every check passes");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (simulate->parsed()) {
            return do_simulate(config_path, records_path);
        }
        if (sweep->parsed()) {
            return do_sweep(spec_path, sweep_out);
        }
        if (curves->parsed()) {
            return do_curves(dmax, steps, curves_out);
        }
        if (selftest->parsed()) {
            return run_selftest(std::cout) == 0 ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace qkd
