#include "qkd/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <fstream>
#include <iostream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qkd/adversary.hpp"
#include "qkd/analysis.hpp"
#include "qkd/cli.hpp"
#include "qkd/config.hpp"
#include "qkd/devices.hpp"
#include "qkd/optics.hpp"
#include "qkd/protocols.hpp"
#include "qkd/quantum.hpp"
#include "qkd/random.hpp"

namespace fs = std::filesystem;

namespace qkd {

namespace {

struct Ctx {
    std::ostream& out;
    int failures = 0;
};

void report(Ctx& ctx, bool ok, const std::string& name, const std::string& detail) {
    ctx.out << (ok ? "[PASS] " : "[FAIL] ") << name;
    if (!detail.empty()) {
        ctx.out << ": " << detail;
    }
    ctx.out << '\n';
    if (!ok) {
        ++ctx.failures;
    }
}

std::string text(const char* fmt, ...) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof(buf), fmt, args);
    va_end(args);
    return buf;
}

SessionConfig ideal_session(ProtocolKind protocol, std::uint64_t pulses, std::uint64_t seed) {
    SessionConfig cfg;
    cfg.protocol = protocol;
    cfg.pulses = pulses;
    cfg.seed = seed;
    cfg.source = TruncatedSource{1.0, 0.0};
    cfg.channel = FiberChannel{0.25, 0.0};
    cfg.detector = Detector{1.0, 0.0, "bob"};
    return cfg;
}

SessionResult run_cfg(const SessionConfig& cfg) {
    return run_session(cfg, cfg.eve, RandomStream(cfg.seed));
}

struct CliRun {
    int exit_code = -1;
    std::string output;
};

CliRun run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("qkdsim");
    for (const std::string& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream captured;
    std::streambuf* old_out = std::cout.rdbuf(captured.rdbuf());
    std::streambuf* old_err = std::cerr.rdbuf(captured.rdbuf());
    CliRun run;
    try {
        run.exit_code = cli_main(static_cast<int>(argv.size()), argv.data());
    } catch (...) {
        std::cout.rdbuf(old_out);
        std::cerr.rdbuf(old_err);
        throw;
    }
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    run.output = captured.str();
    return run;
}

// Pull "key = value" out of a simulate summary; returns NaN when missing.
double summary_value(const std::string& output, const std::string& key) {
    std::istringstream in(output);
    std::string line;
    const std::string prefix = key + " = ";
    while (std::getline(in, line)) {
        if (line.compare(0, prefix.size(), prefix) == 0) {
            return std::strtod(line.c_str() + prefix.size(), nullptr);
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / "qkdsim-selftest";
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

// ---- acceptance battery -------------------------------------------------

void check_transpose_identity(Ctx& ctx) {
    RandomStream rng(11);
    double worst = transpose_identity_residual(Unitary2::identity());
    worst = std::max(worst, transpose_identity_residual(Unitary2::diag_phase(1.2345)));
    for (int i = 0; i < 100; ++i) {
        const Unitary2 u = Unitary2::haar_random(rng);
        worst = std::max(worst, transpose_identity_residual(u));
    }
    report(ctx, worst <= 1e-12, "transpose identity on maximally entangled state",
           text("max residual %.3g over 102 matrices", worst));
}

void check_bb84_honest(Ctx& ctx) {
    const SessionResult r = run_cfg(ideal_session(ProtocolKind::Bb84, 100000, 201));
    const bool ok = r.sifted_rate >= 0.495 && r.sifted_rate <= 0.505 && r.qber == 0.0;
    report(ctx, ok, "bb84 honest ideal session",
           text("sifted fraction %.4f, qber %g", r.sifted_rate, r.qber));
}

void check_sarg_honest(Ctx& ctx) {
    const SessionResult r = run_cfg(ideal_session(ProtocolKind::Sarg, 100000, 301));
    const bool ok = r.sifted_rate >= 0.245 && r.sifted_rate <= 0.255 && r.qber == 0.0;
    report(ctx, ok, "sarg honest ideal session",
           text("conclusive fraction %.4f, qber %g", r.sifted_rate, r.qber));
}

SessionResult intercept_resend_session() {
    SessionConfig cfg = ideal_session(ProtocolKind::Bb84, 100000, 401);
    cfg.eve = EveStrategy::intercept_resend(1.0);
    return run_cfg(cfg);
}

void check_intercept_resend_qber(Ctx& ctx) {
    const SessionResult r = intercept_resend_session();
    const bool ok = r.qber >= 0.24 && r.qber <= 0.26;
    report(ctx, ok, "intercept-resend qber",
           text("qber %.4f over %llu disclosed bits", r.qber,
                static_cast<unsigned long long>(r.disclosed_count)));
}

void check_individual_crossing(Ctx& ctx) {
    const double d = individual_attack_threshold();
    report(ctx, std::abs(d - 0.146447) <= 1e-5, "individual-attack information crossing",
           text("root at %.6f (expected 0.146447)", d));
}

void check_shor_preskill_zero(Ctx& ctx) {
    const double d = shor_preskill_threshold();
    report(ctx, std::abs(d - 0.110028) <= 1e-5, "shor-preskill rate zero",
           text("root at %.6f (expected 0.110028)", d));
}

void check_usd_fraction(Ctx& ctx) {
    const std::size_t n = 100000;
    RandomStream prep(701);
    EveKnowledge knowledge;
    knowledge.reserve(n);
    std::vector<Announcement> revealed(n);
    for (std::size_t i = 0; i < n; ++i) {
        const StateRef prepared{prep.uniform_bit(),
                                prep.uniform_bit() ? Basis::Y : Basis::X};
        const StateRef partner{prep.uniform_bit(), other_basis(prepared.basis)};
        EveEntry entry;
        entry.pulse_id = i;
        entry.has_stored_state = true;
        entry.stored = prepared;
        knowledge.push_back(entry);
        revealed[i] = Announcement{Announcement::Kind::PairReveal, Basis::X, prepared,
                                   partner};
    }
    RandomStream rng(702);
    const std::vector<EveBitKnowledge> known =
        eve_measure_after_reveal(knowledge, revealed, rng);
    std::size_t conclusive = 0;
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < known.size(); ++i) {
        if (known[i].conclusive) {
            ++conclusive;
            if (known[i].bit != basis_bit(knowledge[i].stored.basis)) {
                ++wrong;
            }
        }
    }
    const double p = 1.0 - 1.0 / std::numbers::sqrt2;
    const double frac = static_cast<double>(conclusive) / static_cast<double>(n);
    const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    const bool ok = std::abs(frac - p) <= 3.0 * sigma && wrong == 0;
    report(ctx, ok, "unambiguous discrimination rate",
           text("conclusive fraction %.5f (expected %.5f +- %.5f), %zu wrong", frac, p,
                3.0 * sigma, wrong));
}

void check_visibility_link(Ctx& ctx) {
    SessionConfig cfg = ideal_session(ProtocolKind::Bb84, 200000, 801);
    cfg.visibility = 0.998;
    const SessionResult r = run_cfg(cfg);
    const double expected = qber_from_visibility(Visibility(0.998));
    const double sigma =
        std::sqrt(expected * (1.0 - expected) / static_cast<double>(r.disclosed_count));
    const bool ok = std::abs(r.qber - expected) <= 3.0 * sigma;
    report(ctx, ok, "visibility-limited qber",
           text("qber %.5f at V = 0.998 (expected %.5f +- %.5f)", r.qber, expected,
                3.0 * sigma));
}

void check_pns_separation(Ctx& ctx) {
    SessionConfig base;
    base.protocol = ProtocolKind::Bb84;
    base.pulses = 1000000;
    base.seed = 901;
    base.source = WeakCoherentSource{0.1};
    base.channel = FiberChannel{0.25, 100.0};
    base.detector = Detector{1.0, 0.0, "bob"};

    const SessionResult honest = run_session(base, EveStrategy::none(), RandomStream(base.seed));

    SessionConfig pns_cfg = base;
    pns_cfg.eve = EveStrategy::pns();
    const SessionResult pns_bb84 =
        run_session(pns_cfg, pns_cfg.eve, RandomStream(pns_cfg.seed));

    SessionConfig sarg_cfg = pns_cfg;
    sarg_cfg.protocol = ProtocolKind::Sarg;
    const SessionResult pns_sarg =
        run_session(sarg_cfg, sarg_cfg.eve, RandomStream(sarg_cfg.seed));

    const double n = static_cast<double>(base.pulses);
    const auto var = [n](const SessionResult& r) {
        return n * r.detection_rate * (1.0 - r.detection_rate);
    };
    const double sigma = std::sqrt(var(honest) + var(pns_bb84));
    const double diff = static_cast<double>(pns_bb84.bob_detections) -
                        static_cast<double>(honest.bob_detections);

    const bool rate_ok = std::abs(diff) <= 3.0 * sigma;
    const bool bb84_ok = std::abs(pns_bb84.eve_info_per_sifted_bit - 1.0) <= 0.01;
    const bool sarg_ok = pns_sarg.eve_info_per_sifted_bit > 0.0 &&
                         pns_sarg.eve_info_per_sifted_bit <= 0.31;
    report(ctx, rate_ok && bb84_ok && sarg_ok, "pns stealth and information separation",
           text("detections honest %llu vs pns %llu (3 sigma = %.1f); eve info/bit "
                "bb84 %.4f, sarg %.4f",
                static_cast<unsigned long long>(honest.bob_detections),
                static_cast<unsigned long long>(pns_bb84.bob_detections), 3.0 * sigma,
                pns_bb84.eve_info_per_sifted_bit, pns_sarg.eve_info_per_sifted_bit));
}

void check_rate_vs_distance(Ctx& ctx) {
    SweepSpec spec;
    spec.base.protocol = ProtocolKind::Bb84;
    spec.base.pulses = 8000000;
    spec.base.seed = 1001;
    spec.base.source = WeakCoherentSource{0.1};
    spec.base.channel = FiberChannel{0.35, 0.0};
    spec.base.detector = Detector{0.1, 1e-5, "bob"};
    spec.parameter = "channel.length_km";
    for (int km = 0; km <= 100; km += 10) {
        spec.values.push_back(km);
    }
    spec.trials = 1;
    const KeyRateReport report_out = run_sweep(spec);

    bool monotone = true;
    for (std::size_t i = 0; i + 1 < report_out.rows.size(); ++i) {
        if (report_out.rows[i + 1].secret_rate > report_out.rows[i].secret_rate + 1e-12) {
            monotone = false;
        }
    }
    const bool starts_positive = report_out.rows.front().secret_rate > 0.0;
    const bool dies = report_out.rows.back().secret_rate == 0.0;
    double zero_at = -1.0;
    for (const KeyRateRow& row : report_out.rows) {
        if (row.secret_rate == 0.0) {
            zero_at = row.value;
            break;
        }
    }
    report(ctx, monotone && starts_positive && dies,
           "secret rate vs distance is non-increasing and dies out",
           text("rate %.3g at 0 km, first zero at %g km", report_out.rows.front().secret_rate,
                zero_at));
}

void check_deterministic_logs(Ctx& ctx) {
    const fs::path dir = scratch_dir();
    const fs::path cfg_path = dir / "replay.cfg";
    write_file(cfg_path,
               "protocol = sarg\n"
               "pulses = 20000\n"
               "seed = 4242\n"
               "source.kind = wcs\n"
               "source.mu = 0.2\n"
               "channel.attenuation_db_per_km = 0.25\n"
               "channel.length_km = 10\n"
               "detector.efficiency = 0.8\n"
               "detector.dark_prob = 1e-4\n"
               "optics.visibility = 0.99\n"
               "eve.strategy = intercept_resend\n"
               "eve.omega = 0.5\n");
    const fs::path rec_a = dir / "replay_a.jsonl";
    const fs::path rec_b = dir / "replay_b.jsonl";
    const CliRun first = run_cli({"simulate", "--config", cfg_path.string(), "--records",
                                  rec_a.string()});
    const CliRun second = run_cli({"simulate", "--config", cfg_path.string(), "--records",
                                   rec_b.string()});
    const std::string log_a = slurp(rec_a);
    const std::string log_b = slurp(rec_b);
    const bool ok = first.exit_code == 0 && second.exit_code == 0 && !log_a.empty() &&
                    log_a == log_b && first.output == second.output;
    report(ctx, ok, "repeated runs produce byte-identical record logs",
           text("%zu bytes per log, summaries %s", log_a.size(),
                first.output == second.output ? "identical" : "differ"));
}

// ---- worked examples ----------------------------------------------------

void check_measurement_frequency(Ctx& ctx) {
    const QubitState plus_x = prepare_state(0, Basis::X);
    RandomStream rng(1201);
    const int n = 1000000;
    int zeros = 0;
    for (int i = 0; i < n; ++i) {
        zeros += measure(plus_x, Basis::Y, rng) == 0 ? 1 : 0;
    }
    const double freq = static_cast<double>(zeros) / n;
    report(ctx, freq >= 0.498 && freq <= 0.502, "conjugate-basis outcome frequency",
           text("frequency %.5f over 1e6 draws", freq));
}

void check_entropy_values(Ctx& ctx) {
    const double h = binary_entropy(0.110028);
    const double mi = mutual_information_bsc(0.25);
    const bool ok = std::abs(h - 0.5) <= 1e-6 && std::abs(mi - 0.18872) <= 1e-5;
    report(ctx, ok, "entropy and mutual-information values",
           text("h(0.110028) = %.7f, 1 - h(0.25) = %.6f", h, mi));
}

void check_serial_interferometer(Ctx& ctx) {
    const double phi1 = 0.7;
    const double phi2 = 1.9;
    const Interferometer first{phi1, 1};
    const Interferometer second{phi2, 1};
    const TimeBinAmplitudes mid = propagate(TimeBinAmplitudes::single_pulse(), first);
    const TimeBinAmplitudes picked = mid.selected_port(0);
    const TimeBinAmplitudes out = propagate(picked, second);
    const double central = std::norm(out.at(0, 1));
    const double total = out.total_probability();
    const double ratio = central / total;
    const double expected = (1.0 + std::cos(phi1 - phi2)) / 4.0;
    report(ctx, std::abs(ratio - expected) <= 1e-12 && std::abs(total - 0.5) <= 1e-12,
           "serial interferometer central fringe",
           text("central-bin share %.6f (expected %.6f), post-selected total %.3f", ratio,
                expected, total));
}

void check_franson_anticorrelation(Ctx& ctx) {
    const double a = 0.3;
    const double b = std::numbers::pi - a;
    const CoincidenceDistribution dist = franson_coincidence(a, b, Visibility(1.0));
    const double same = dist.prob(Peak::Central, 0, 0) + dist.prob(Peak::Central, 1, 1);
    const bool peaks_ok = std::abs(dist.peak_prob(Peak::Early) - 0.25) <= 1e-12 &&
                          std::abs(dist.peak_prob(Peak::Central) - 0.5) <= 1e-12 &&
                          std::abs(dist.peak_prob(Peak::Late) - 0.25) <= 1e-12;
    report(ctx, same <= 1e-12 && peaks_ok, "two-photon central-peak anticorrelation",
           text("same-detector central probability %.3g, peaks %.2f/%.2f/%.2f", same,
                dist.peak_prob(Peak::Early), dist.peak_prob(Peak::Central),
                dist.peak_prob(Peak::Late)));
}

void check_plug_and_play(Ctx& ctx) {
    const auto clicks = plug_and_play_click_prob(std::numbers::pi, 0.0, Visibility(0.998));
    const double qber = qber_from_visibility(Visibility(0.998));
    const bool ok = std::abs(clicks[0] - 0.001) <= 1e-12 && std::abs(qber - 0.001) <= 1e-15;
    report(ctx, ok, "go-and-return fringe at v = 0.998",
           text("dark-fringe click probability %.6f, visibility-limited qber %.6f",
                clicks[0], qber));
}

void check_chsh(Ctx& ctx) {
    const double s1 = chsh_value(Visibility(1.0));
    const double s2 = chsh_value(Visibility(1.0 / std::numbers::sqrt2));
    const bool ok = std::abs(s1 - 2.828427) <= 1e-6 && std::abs(s2 - 2.0) <= 1e-9;
    report(ctx, ok, "chsh values at full and reduced visibility",
           text("S(1) = %.6f, S(1/sqrt 2) = %.9f", s1, s2));
}

void check_photon_statistics(Ctx& ctx) {
    const PhotonSource src = WeakCoherentSource{0.1};
    const double tail = prob_at_least_two(src);
    const double single = photon_number_prob(src, 1);
    RandomStream rng(1801);
    const int n = 10000000;
    int multi = 0;
    for (int i = 0; i < n; ++i) {
        multi += rng.poisson(0.1) >= 2 ? 1 : 0;
    }
    const double freq = static_cast<double>(multi) / n;
    const double sigma = std::sqrt(tail * (1.0 - tail) / n);
    const bool ok = std::abs(tail - 0.004679) <= 1e-6 && std::abs(single - 0.09048) <= 1e-5 &&
                    std::abs(freq - tail) <= 3.0 * sigma;
    report(ctx, ok, "photon-number statistics at mu = 0.1",
           text("P(n >= 2) = %.6f, P(1) = %.5f, empirical tail %.6f +- %.6f", tail, single,
                freq, 3.0 * sigma));
}

void check_transmittance_values(Ctx& ctx) {
    const double t67 = transmittance(FiberChannel{0.25, 67.0});
    const double t40 = transmittance(FiberChannel{0.25, 40.0});
    const bool ok = std::abs(t67 - 0.02113) <= 1e-5 && std::abs(t40 - 0.1) <= 1e-12;
    report(ctx, ok, "fiber transmittance",
           text("t(67 km) = %.6f, t(40 km) = %.6f", t67, t40));
}

void check_dark_counts(Ctx& ctx) {
    const Detector det{1.0, 1e-5, "d0"};
    RandomStream rng(2001);
    const long long gates = 100000000;
    long long clicks = 0;
    for (long long i = 0; i < gates; ++i) {
        clicks += detect(0, det, rng) ? 1 : 0;
    }
    const double rate = static_cast<double>(clicks) / static_cast<double>(gates);
    const double sigma = std::sqrt(1e-5 * (1.0 - 1e-5) / static_cast<double>(gates));
    report(ctx, std::abs(rate - 1e-5) <= 3.0 * sigma, "dark-count rate",
           text("rate %.3g over 1e8 empty gates (expected 1e-5 +- %.3g)", rate, 3.0 * sigma));
}

void check_watchdog(Ctx& ctx) {
    const SessionConfig cfg;
    const WatchdogMonitor monitor{cfg.watchdog_tap_fraction,
                                  cfg.effective_watchdog_threshold()};
    const bool alarm =
        watchdog_check(100.0 * cfg.watchdog_nominal_energy, monitor) == MonitorVerdict::Alarm;
    const bool pass =
        watchdog_check(cfg.watchdog_nominal_energy, monitor) == MonitorVerdict::Pass;
    report(ctx, alarm && pass, "incoming-intensity watchdog",
           text("100x nominal -> %s, nominal -> %s", alarm ? "alarm" : "pass",
                pass ? "pass" : "alarm"));
}

void check_coincidence_monitor(Ctx& ctx) {
    SessionConfig bright;
    bright.protocol = ProtocolKind::Bb84;
    bright.pulses = 20000;
    bright.seed = 2201;
    bright.source = TruncatedSource{0.01, 0.05};
    bright.channel = FiberChannel{0.25, 0.0};
    bright.detector = Detector{1.0, 1e-5, "bob"};
    const SessionResult attacked = run_cfg(bright);

    SessionConfig honest;
    honest.protocol = ProtocolKind::Bb84;
    honest.pulses = 1000000;
    honest.seed = 2202;
    honest.source = WeakCoherentSource{0.0};
    honest.detector = Detector{1.0, 1e-5, "bob"};
    const SessionResult quiet = run_cfg(honest);

    report(ctx, attacked.coincidence_alarm && !quiet.coincidence_alarm,
           "coincidence monitor",
           text("bunched source: %llu doubles -> %s; dark-only run -> %s",
                static_cast<unsigned long long>(attacked.double_clicks),
                attacked.coincidence_alarm ? "alarm" : "pass",
                quiet.coincidence_alarm ? "alarm" : "pass"));
}

void check_intercept_resend_details(Ctx& ctx) {
    const SessionResult r = intercept_resend_session();
    const double sigma =
        std::sqrt(0.25 * 0.75 / static_cast<double>(r.disclosed_count));
    const bool estimate_ok = std::abs(r.qber - 0.25) <= 3.0 * sigma;
    const bool guess_ok = r.eve_guess_accuracy >= 0.74 && r.eve_guess_accuracy <= 0.76;
    report(ctx, estimate_ok && guess_ok, "intercept-resend estimate and eavesdropper accuracy",
           text("qber %.4f (3 sigma = %.4f), guess accuracy %.4f", r.qber, 3.0 * sigma,
                r.eve_guess_accuracy));
}

void check_pns_feasibility(Ctx& ctx) {
    const PhotonSource src = WeakCoherentSource{0.1};
    const FiberChannel channel{0.25, 100.0};
    const Detector det{1.0, 0.0, "bob"};
    const double honest = expected_click_prob_two_detectors(src, transmittance(channel), det);
    const double tail = prob_at_least_two(src);
    const PnsPolicy policy = PnsPolicy::derive(src, transmittance(channel), det);
    report(ctx, honest < tail && policy.full_pns_feasible(),
           "full photon-number splitting feasible in the loss-dominated regime",
           text("honest click probability %.3g < P(n >= 2) = %.3g, forward fraction %.4f",
                honest, tail, policy.forward_multi_prob));
}

void check_csiszar_korner_chain(Ctx& ctx) {
    const InfoCurvePoint pt = individual_attack_curves(0.10);
    const double r = csiszar_korner_rate(pt.i_ab, pt.i_ae, 1.0);
    const bool ok = std::abs(pt.i_ab - 0.53100) <= 1e-4 &&
                    std::abs(pt.i_ae - 0.27807) <= 1e-4 && std::abs(r - 0.25293) <= 1e-4;
    report(ctx, ok, "information curves and distillable rate at d = 0.10",
           text("i_ab %.5f, i_ae %.5f, rate %.5f", pt.i_ab, pt.i_ae, r));
}

void check_rate_thresholds(Ctx& ctx) {
    SessionResult r;
    r.sifted_rate = 1.0;
    r.eve_info_per_sifted_bit = 0.0;

    r.qber = 0.147;
    const double above_ind = secret_rate_from_session(r, 1.0, LeakageModel::IndividualAttack);
    r.qber = 0.146;
    const double below_ind = secret_rate_from_session(r, 1.0, LeakageModel::IndividualAttack);
    r.qber = 0.111;
    const double above_sp = secret_rate_from_session(r, 1.0, LeakageModel::ShorPreskill);
    r.qber = 0.109;
    const double below_sp = secret_rate_from_session(r, 1.0, LeakageModel::ShorPreskill);
    const bool ok = above_ind == 0.0 && below_ind > 0.0 && above_sp == 0.0 && below_sp > 0.0;
    report(ctx, ok, "secret rate vanishes beyond the thresholds",
           text("individual: r(0.147) = %g, r(0.146) = %.3g; one-way bound: r(0.111) = %g, "
                "r(0.109) = %.3g",
                above_ind, below_ind, above_sp, below_sp));
}

bool rows_equal(const KeyRateRow& a, const KeyRateRow& b) {
    return a.value == b.value && a.detection_rate == b.detection_rate &&
           a.detection_rate_se == b.detection_rate_se && a.sifted_rate == b.sifted_rate &&
           a.sifted_rate_se == b.sifted_rate_se && a.qber == b.qber &&
           a.qber_se == b.qber_se && a.i_ab == b.i_ab && a.i_ae == b.i_ae &&
           a.secret_rate == b.secret_rate && a.secret_rate_se == b.secret_rate_se &&
           a.alarms == b.alarms;
}

void check_sweep_reordering(Ctx& ctx) {
    SweepSpec spec;
    spec.base.pulses = 20000;
    spec.base.seed = 2701;
    spec.base.source = WeakCoherentSource{0.1};
    spec.base.detector = Detector{0.5, 1e-5, "bob"};
    spec.parameter = "channel.length_km";
    spec.trials = 2;
    spec.values = {30.0, 10.0, 20.0};
    const KeyRateReport a = run_sweep(spec);
    spec.values = {10.0, 20.0, 30.0};
    const KeyRateReport b = run_sweep(spec);
    bool equal = a.rows.size() == b.rows.size();
    for (std::size_t i = 0; equal && i < a.rows.size(); ++i) {
        equal = rows_equal(a.rows[i], b.rows[i]);
    }
    report(ctx, equal && a.rows.size() == 3, "sweep output invariant under value reordering",
           text("%zu rows, first value %g", a.rows.size(),
                a.rows.empty() ? -1.0 : a.rows.front().value));
}

void check_analytic_sweep(Ctx& ctx) {
    SweepSpec spec;
    spec.parameter = "analytic.d";
    for (int i = 0; i <= 50; ++i) {
        spec.values.push_back(0.005 * i);
    }
    spec.base.leakage = LeakageModel::IndividualAttack;
    const KeyRateReport ind = run_sweep(spec);
    spec.base.leakage = LeakageModel::ShorPreskill;
    const KeyRateReport sp = run_sweep(spec);

    const auto zero_bracket = [](const KeyRateReport& rep) {
        for (std::size_t i = 0; i + 1 < rep.rows.size(); ++i) {
            if (rep.rows[i].secret_rate > 0.0 && rep.rows[i + 1].secret_rate == 0.0) {
                return std::pair<double, double>(rep.rows[i].value, rep.rows[i + 1].value);
            }
        }
        return std::pair<double, double>(-1.0, -1.0);
    };
    const auto [ind_lo, ind_hi] = zero_bracket(ind);
    const auto [sp_lo, sp_hi] = zero_bracket(sp);
    const KeyRateRow& origin = ind.rows.front();
    const bool origin_ok = origin.value == 0.0 && origin.i_ab == 1.0 && origin.i_ae == 0.0 &&
                           origin.secret_rate == 1.0;
    const bool ok = origin_ok && ind_lo < 0.146447 && 0.146447 < ind_hi &&
                    sp_lo < 0.110028 && 0.110028 < sp_hi;
    report(ctx, ok, "analytic disturbance sweep brackets both thresholds",
           text("individual zero in (%g, %g], one-way zero in (%g, %g]", ind_lo, ind_hi,
                sp_lo, sp_hi));
}

void check_pns_mu_sweep(Ctx& ctx) {
    SweepSpec spec;
    spec.base.protocol = ProtocolKind::Bb84;
    spec.base.pulses = 1000000;
    spec.base.seed = 2901;
    spec.base.source = WeakCoherentSource{0.1};
    spec.base.channel = FiberChannel{0.25, 100.0};
    spec.base.detector = Detector{1.0, 0.0, "bob"};
    spec.base.eve = EveStrategy::pns();
    spec.parameter = "source.mu";
    spec.values = {0.05, 0.1, 0.3, 0.6};
    const KeyRateReport bb84 = run_sweep(spec);
    spec.base.protocol = ProtocolKind::Sarg;
    const KeyRateReport sarg = run_sweep(spec);

    bool ok = bb84.rows.size() == 4 && sarg.rows.size() == 4;
    double bb84_max = 0.0;
    double sarg_min = 1.0;
    for (std::size_t i = 0; ok && i < 4; ++i) {
        bb84_max = std::max(bb84_max, bb84.rows[i].secret_rate);
        sarg_min = std::min(sarg_min, sarg.rows[i].secret_rate);
        ok = bb84.rows[i].secret_rate == 0.0 && sarg.rows[i].secret_rate > 0.0;
    }
    report(ctx, ok, "number-splitting separates the protocols across mu",
           text("bb84 max rate %g, sarg min rate %.3g over mu in {0.05, 0.1, 0.3, 0.6}",
                bb84_max, sarg_min));
}

void check_csv_round_trip(Ctx& ctx) {
    SweepSpec spec;
    spec.parameter = "analytic.d";
    spec.values = {0.0, 0.03, 0.07, 0.11, 0.146447, 0.2};
    const KeyRateReport before = run_sweep(spec);
    std::stringstream buf;
    write_key_rate_csv(buf, before);
    const KeyRateReport after = parse_key_rate_csv(buf);
    bool equal = before.rows.size() == after.rows.size();
    for (std::size_t i = 0; equal && i < before.rows.size(); ++i) {
        equal = rows_equal(before.rows[i], after.rows[i]);
    }
    report(ctx, equal, "key-rate csv round trip",
           text("%zu rows reproduced exactly", before.rows.size()));
}

void check_cli_contract(Ctx& ctx) {
    const fs::path dir = scratch_dir();

    const fs::path ideal = dir / "ideal_bb84.cfg";
    write_file(ideal,
               "protocol = bb84\n"
               "pulses = 100000\n"
               "seed = 3101\n"
               "source.kind = truncated\n"
               "source.p1 = 1\n"
               "source.p_multi = 0\n"
               "channel.length_km = 0\n"
               "detector.efficiency = 1\n"
               "detector.dark_prob = 0\n");
    const CliRun sim = run_cli({"simulate", "--config", ideal.string()});
    const double sifted = summary_value(sim.output, "sifted_rate");
    const double qber = summary_value(sim.output, "qber");
    const bool sim_ok =
        sim.exit_code == 0 && sifted >= 0.495 && sifted <= 0.505 && qber == 0.0;

    const fs::path curves = dir / "curves.csv";
    const CliRun cur = run_cli({"curves", "--dmax", "0.25", "--steps", "100", "--out",
                                curves.string()});
    std::ifstream cin_file(curves);
    std::string header;
    std::string first_row;
    std::getline(cin_file, header);
    std::getline(cin_file, first_row);
    const bool curves_ok = cur.exit_code == 0 && first_row == "0,1,0,1,1";

    const fs::path bright = dir / "bright.cfg";
    write_file(bright,
               "pulses = 20000\n"
               "seed = 3102\n"
               "source.kind = truncated\n"
               "source.p1 = 0.01\n"
               "source.p_multi = 0.05\n"
               "detector.dark_prob = 1e-5\n");
    const CliRun alarm = run_cli({"simulate", "--config", bright.string()});

    const fs::path broken = dir / "broken.cfg";
    write_file(broken, "protocol = bb84\nno_such_knob = 1\n");
    const CliRun rejected = run_cli({"simulate", "--config", broken.string()});

    const bool ok = sim_ok && curves_ok && alarm.exit_code == 2 && rejected.exit_code == 1;
    report(ctx, ok, "cli contract",
           text("simulate: sifted %.4f qber %g (exit %d); curves d=0 row '%s'; alarm exit %d; "
                "bad config exit %d",
                sifted, qber, sim.exit_code, first_row.c_str(), alarm.exit_code,
                rejected.exit_code));
}

}  // namespace

int run_selftest(std::ostream& out) {
    Ctx ctx{out};

    check_transpose_identity(ctx);
    check_bb84_honest(ctx);
    check_sarg_honest(ctx);
    check_intercept_resend_qber(ctx);
    check_individual_crossing(ctx);
    check_shor_preskill_zero(ctx);
    check_usd_fraction(ctx);
    check_visibility_link(ctx);
    check_pns_separation(ctx);
    check_rate_vs_distance(ctx);
    check_deterministic_logs(ctx);

    check_measurement_frequency(ctx);
    check_entropy_values(ctx);
    check_serial_interferometer(ctx);
    check_franson_anticorrelation(ctx);
    check_plug_and_play(ctx);
    check_chsh(ctx);
    check_photon_statistics(ctx);
    check_transmittance_values(ctx);
    check_dark_counts(ctx);
    check_watchdog(ctx);
    check_coincidence_monitor(ctx);
    check_intercept_resend_details(ctx);
    check_pns_feasibility(ctx);
    check_csiszar_korner_chain(ctx);
    check_rate_thresholds(ctx);
    check_sweep_reordering(ctx);
    check_analytic_sweep(ctx);
    check_pns_mu_sweep(ctx);
    check_csv_round_trip(ctx);
    check_cli_contract(ctx);

    const int total = 31;
    out << "selftest: " << (total - ctx.failures) << "/" << total << " checks passed\n";
    return ctx.failures;
}

}  // namespace qkd
