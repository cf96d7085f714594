#include "qkd/analysis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "qkd/adversary.hpp"

namespace qkd {

namespace {

constexpr std::uint64_t kSweepSeedSalt = 0x5357454550534545ull;   // "SWEEPSEE"
constexpr std::uint64_t kSweepValueSalt = 0x76616c75652d736cull;  // "value-sl"
constexpr std::uint64_t kSweepTrialSalt = 0x747269616c2d736cull;  // "trial-sl"

constexpr const char* kCsvHeader =
    "value,detection_rate,detection_rate_se,sifted_rate,sifted_rate_se,"
    "qber,qber_se,i_ab,i_ae,secret_rate,secret_rate_se,alarms";

double clamp_qber(double q) {
    return std::clamp(q, 0.0, 0.5);
}

// Session parameters a sweep may vary. Each applier mutates a copy of the
// base config; unknown names are rejected by spec validation.
void apply_parameter(SessionConfig& cfg, const std::string& name, double value) {
    if (name == "channel.length_km") {
        cfg.channel.length_km = value;
    } else if (name == "source.mu") {
        if (!std::holds_alternative<WeakCoherentSource>(cfg.source)) {
            throw std::invalid_argument(
                "sweep: source.mu requires an attenuated-laser source");
        }
        cfg.source = WeakCoherentSource{value};
    } else if (name == "detector.efficiency") {
        cfg.detector.efficiency = value;
    } else if (name == "detector.dark_prob") {
        cfg.detector.dark_prob = value;
    } else if (name == "optics.visibility") {
        cfg.visibility = value;
    } else if (name == "eve.omega") {
        if (cfg.eve.kind != EveKind::InterceptResend) {
            throw std::invalid_argument("sweep: eve.omega requires eve.strategy = "
                                        "intercept_resend");
        }
        cfg.eve.omega = value;
    } else {
        throw std::invalid_argument("sweep: unknown parameter '" + name + "'");
    }
}

double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double se_of(const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) {
        return 0.0;
    }
    double ss = 0.0;
    for (double x : xs) {
        ss += (x - mean) * (x - mean);
    }
    const double n = static_cast<double>(xs.size());
    return std::sqrt(ss / (n - 1.0) / n);
}

// Rows are stored already quantized to their CSV representation so an
// emitted report parses back to the exact in-memory values.
void quantize_row(KeyRateRow& row) {
    row.detection_rate = quantize_g9(row.detection_rate);
    row.detection_rate_se = quantize_g9(row.detection_rate_se);
    row.sifted_rate = quantize_g9(row.sifted_rate);
    row.sifted_rate_se = quantize_g9(row.sifted_rate_se);
    row.qber = quantize_g9(row.qber);
    row.qber_se = quantize_g9(row.qber_se);
    row.i_ab = quantize_g9(row.i_ab);
    row.i_ae = quantize_g9(row.i_ae);
    row.secret_rate = quantize_g9(row.secret_rate);
    row.secret_rate_se = quantize_g9(row.secret_rate_se);
}

KeyRateRow analytic_row(double d, LeakageModel model) {
    if (!(d >= 0.0 && d <= 0.5)) {
        throw std::invalid_argument("sweep: analytic.d values must lie in [0, 0.5]");
    }
    const InfoCurvePoint pt = individual_attack_curves(d);
    KeyRateRow row;
    row.value = d;
    row.detection_rate = 1.0;
    row.sifted_rate = 1.0;
    row.qber = d;
    row.i_ab = pt.i_ab;
    row.i_ae = pt.i_ae;
    row.secret_rate = model == LeakageModel::IndividualAttack
                          ? std::max(0.0, pt.i_ab - pt.i_ae)
                          : std::max(0.0, 1.0 - 2.0 * binary_entropy(d));
    quantize_row(row);
    return row;
}

}  // namespace

double csiszar_korner_rate(double i_ab, double i_ae, double i_be) {
    for (double x : {i_ab, i_ae, i_be}) {
        if (!(x >= 0.0 && x <= 1.0)) {
            throw std::invalid_argument("csiszar_korner_rate: informations must lie in [0, 1]");
        }
    }
    return std::max(0.0, i_ab - std::min(i_ae, i_be));
}

double secret_rate_from_session(const SessionResult& result, double f, LeakageModel model) {
    if (!(f >= 1.0)) {
        throw std::invalid_argument("secret_rate_from_session: f must be >= 1");
    }
    const double q = clamp_qber(result.qber);
    const double correction = f * binary_entropy(q);
    double leakage = 0.0;
    if (model == LeakageModel::ShorPreskill) {
        leakage = binary_entropy(q);
    } else {
        const InfoCurvePoint pt = individual_attack_curves(q);
        leakage = std::max(pt.i_ae, result.eve_info_per_sifted_bit);
    }
    return result.sifted_rate * std::max(0.0, 1.0 - correction - leakage);
}

void attach_key_rates(SessionResult& result, double f) {
    result.secret_rate_individual =
        secret_rate_from_session(result, f, LeakageModel::IndividualAttack);
    result.secret_rate_shor_preskill =
        secret_rate_from_session(result, f, LeakageModel::ShorPreskill);
}

std::string format_g9(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", x);
    return buf;
}

double quantize_g9(double x) {
    return std::strtod(format_g9(x).c_str(), nullptr);
}

void SweepSpec::validate() const {
    base.validate();
    if (parameter.empty()) {
        throw std::invalid_argument("sweep: parameter must be set");
    }
    if (values.empty()) {
        throw std::invalid_argument("sweep: values must be non-empty");
    }
    if (trials < 1) {
        throw std::invalid_argument("sweep: trials must be >= 1");
    }
}

KeyRateReport run_sweep(const SweepSpec& spec) {
    spec.validate();

    std::vector<double> values(spec.values.size());
    std::transform(spec.values.begin(), spec.values.end(), values.begin(), quantize_g9);
    std::sort(values.begin(), values.end());

    KeyRateReport report;
    report.parameter = spec.parameter;
    report.rows.reserve(values.size());

    if (spec.parameter == "analytic.d") {
        for (double d : values) {
            report.rows.push_back(analytic_row(d, spec.base.leakage));
        }
        return report;
    }

    const std::uint64_t seed_key =
        RandomStream::mix64(spec.base.seed ^ kSweepSeedSalt);

    for (double value : values) {
        SessionConfig cfg = spec.base;
        apply_parameter(cfg, spec.parameter, value);
        cfg.validate();

        const std::uint64_t point_key = RandomStream::mix64(
            seed_key ^ RandomStream::mix64(std::bit_cast<std::uint64_t>(value) ^
                                           kSweepValueSalt));

        std::vector<double> det, sift, qber, rate;
        det.reserve(spec.trials);
        sift.reserve(spec.trials);
        qber.reserve(spec.trials);
        rate.reserve(spec.trials);
        std::uint64_t alarms = 0;

        for (std::uint64_t trial = 0; trial < spec.trials; ++trial) {
            const std::uint64_t trial_key = RandomStream::mix64(
                point_key ^ RandomStream::mix64(trial ^ kSweepTrialSalt));
            SessionResult result =
                run_session(cfg, cfg.eve, RandomStream::from_key(trial_key));
            attach_key_rates(result, cfg.error_correction_f);
            det.push_back(result.detection_rate);
            sift.push_back(result.sifted_rate);
            qber.push_back(result.qber);
            rate.push_back(cfg.leakage == LeakageModel::IndividualAttack
                               ? result.secret_rate_individual
                               : result.secret_rate_shor_preskill);
            alarms += result.any_alarm() ? 1 : 0;
        }

        KeyRateRow row;
        row.value = value;
        row.detection_rate = mean_of(det);
        row.detection_rate_se = se_of(det, row.detection_rate);
        row.sifted_rate = mean_of(sift);
        row.sifted_rate_se = se_of(sift, row.sifted_rate);
        row.qber = mean_of(qber);
        row.qber_se = se_of(qber, row.qber);
        const InfoCurvePoint pt = individual_attack_curves(clamp_qber(row.qber));
        row.i_ab = pt.i_ab;
        row.i_ae = pt.i_ae;
        row.secret_rate = mean_of(rate);
        row.secret_rate_se = se_of(rate, row.secret_rate);
        row.alarms = alarms;
        quantize_row(row);
        report.rows.push_back(row);
    }
    return report;
}

void write_key_rate_csv(std::ostream& out, const KeyRateReport& report) {
    out << kCsvHeader << '\n';
    for (const KeyRateRow& r : report.rows) {
        out << format_g9(r.value) << ',' << format_g9(r.detection_rate) << ','
            << format_g9(r.detection_rate_se) << ',' << format_g9(r.sifted_rate) << ','
            << format_g9(r.sifted_rate_se) << ',' << format_g9(r.qber) << ','
            << format_g9(r.qber_se) << ',' << format_g9(r.i_ab) << ','
            << format_g9(r.i_ae) << ',' << format_g9(r.secret_rate) << ','
            << format_g9(r.secret_rate_se) << ',' << r.alarms << '\n';
    }
}

KeyRateReport parse_key_rate_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) {
        throw std::invalid_argument("key-rate CSV: missing or unexpected header");
    }
    KeyRateReport report;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream row_in(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(row_in, field, ',')) {
            fields.push_back(field);
        }
        if (fields.size() != 12) {
            throw std::invalid_argument("key-rate CSV: expected 12 fields per row");
        }
        const auto num = [&](int i) {
            char* end = nullptr;
            const double v = std::strtod(fields[i].c_str(), &end);
            if (end == fields[i].c_str() || *end != '\0') {
                throw std::invalid_argument("key-rate CSV: bad number '" + fields[i] + "'");
            }
            return v;
        };
        KeyRateRow row;
        row.value = num(0);
        row.detection_rate = num(1);
        row.detection_rate_se = num(2);
        row.sifted_rate = num(3);
        row.sifted_rate_se = num(4);
        row.qber = num(5);
        row.qber_se = num(6);
        row.i_ab = num(7);
        row.i_ae = num(8);
        row.secret_rate = num(9);
        row.secret_rate_se = num(10);
        row.alarms = static_cast<std::uint64_t>(std::strtoull(fields[11].c_str(), nullptr, 10));
        report.rows.push_back(row);
    }
    return report;
}

void write_attack_curves_csv(std::ostream& out, double dmax, std::size_t steps) {
    if (!(dmax > 0.0 && dmax <= 0.5)) {
        throw std::invalid_argument("curves: dmax must lie in (0, 0.5]");
    }
    if (steps < 1) {
        throw std::invalid_argument("curves: steps must be >= 1");
    }
    out << "d,i_ab,i_ae,rate_individual,rate_shor_preskill\n";
    for (std::size_t i = 0; i <= steps; ++i) {
        const double d = dmax * static_cast<double>(i) / static_cast<double>(steps);
        const InfoCurvePoint pt = individual_attack_curves(d);
        const double r_ind = std::max(0.0, pt.i_ab - pt.i_ae);
        const double r_sp = std::max(0.0, 1.0 - 2.0 * binary_entropy(d));
        out << format_g9(d) << ',' << format_g9(pt.i_ab) << ',' << format_g9(pt.i_ae)
            << ',' << format_g9(r_ind) << ',' << format_g9(r_sp) << '\n';
    }
}

}  // namespace qkd
