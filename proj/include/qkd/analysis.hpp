#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qkd/protocols.hpp"

namespace qkd {

// One-way secret-key capacity bound for the generic wiretap setting:
// max(0, i_ab - min(i_ae, i_be)). All arguments are mutual informations in
// bits and must lie in [0, 1].
double csiszar_korner_rate(double i_ab, double i_ae, double i_be);

// Secret bits per emitted pulse extracted from one finished session:
//   r = sifted_rate * max(0, 1 - f * h(Q) - leakage)
// where leakage is h(Q) under the entanglement-purification style model and
// max(i_ae(Q), eve_info_per_sifted_bit) under the individual-attack model
// (the curve is what Q alone certifies; the session term carries attacks,
// like number splitting, that raise Eve's knowledge without raising Q).
double secret_rate_from_session(const SessionResult& result, double f, LeakageModel model);

// Fill secret_rate_individual / secret_rate_shor_preskill on the result.
void attach_key_rates(SessionResult& result, double f);

// Shortest decimal formatting used by every CSV we write: %.9g.
std::string format_g9(double x);
// Round-trip x through its %.9g representation. Sweep values are quantized
// this way up front so a value read back from a CSV seeds the exact same
// simulations.
double quantize_g9(double x);

struct SweepSpec {
    SessionConfig base;
    std::string parameter;
    std::vector<double> values;
    std::uint64_t trials = 1;

    void validate() const;
};

// Aggregated statistics for one sweep point (means over trials, standard
// errors of the mean; zero when trials == 1).
struct KeyRateRow {
    double value = 0.0;
    double detection_rate = 0.0;
    double detection_rate_se = 0.0;
    double sifted_rate = 0.0;
    double sifted_rate_se = 0.0;
    double qber = 0.0;
    double qber_se = 0.0;
    double i_ab = 0.0;  // individual-attack curves at the mean QBER
    double i_ae = 0.0;
    double secret_rate = 0.0;  // under base.leakage
    double secret_rate_se = 0.0;
    std::uint64_t alarms = 0;  // trials that tripped a monitor
};

struct KeyRateReport {
    std::string parameter;
    std::vector<KeyRateRow> rows;  // sorted by value ascending
};

// Run trials x values sessions. Each point is seeded from
// (base.seed, value, trial) alone, so permuting `values` or splitting the
// sweep across runs reproduces identical rows. Supported parameters:
// channel.length_km, source.mu (attenuated-laser source only),
// detector.efficiency, detector.dark_prob, optics.visibility, eve.omega
// (intercept-resend only), and the synthetic parameter analytic.d which
// skips simulation and evaluates the security curves at disturbance d.
KeyRateReport run_sweep(const SweepSpec& spec);

// CSV with the fixed header
// value,detection_rate,detection_rate_se,sifted_rate,sifted_rate_se,qber,
// qber_se,i_ab,i_ae,secret_rate,secret_rate_se,alarms
// (one line). Doubles print as %.9g.
void write_key_rate_csv(std::ostream& out, const KeyRateReport& report);
KeyRateReport parse_key_rate_csv(std::istream& in);

// Security-curve table: steps+1 rows for d in [0, dmax], header
// d,i_ab,i_ae,rate_individual,rate_shor_preskill. rate_individual is
// max(0, i_ab - i_ae); rate_shor_preskill is max(0, 1 - 2 h(d)).
void write_attack_curves_csv(std::ostream& out, double dmax, std::size_t steps);

}  // namespace qkd
