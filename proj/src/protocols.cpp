#include "qkd/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace qkd {

namespace {

// Substream addressing. Per-pulse streams use the pulse id; session-level
// post-processing streams live in the upper tag space so they can never
// collide with a pulse.
constexpr std::uint64_t kStageAlice = 0;
constexpr std::uint64_t kStageSource = 1;
constexpr std::uint64_t kStageEve = 2;
constexpr std::uint64_t kStageChannel = 3;
constexpr std::uint64_t kStageBobBasis = 4;
constexpr std::uint64_t kStageMeasure = 5;
constexpr std::uint64_t kStageDetect = 6;
constexpr std::uint64_t kStageAnnounce = 7;
constexpr std::uint64_t kQberStream = (1ull << 63) + 0;
constexpr std::uint64_t kRevealStream = (1ull << 63) + 1;

const double kUsdInfoPerBit = 1.0 - std::numbers::sqrt2 / 2.0;  // 1 - 1/sqrt(2)

bool exactly_one_click(const PulseRecord& r) {
    return r.click0 != r.click1;
}

int clicked_outcome(const PulseRecord& r) {
    return r.click1 ? 1 : 0;
}

}  // namespace

const char* to_string(ProtocolKind p) {
    return p == ProtocolKind::Bb84 ? "bb84" : "sarg";
}

std::vector<SiftedBit> sift_bb84(std::vector<PulseRecord>& records) {
    std::vector<SiftedBit> sifted;
    for (PulseRecord& r : records) {
        if (exactly_one_click(r) && r.alice_basis == r.bob_basis) {
            r.sift_status = SiftStatus::Kept;
            sifted.push_back({r.pulse_id, r.alice_bit, clicked_outcome(r)});
        } else {
            r.sift_status = SiftStatus::Discarded;
        }
    }
    return sifted;
}

std::vector<SiftedBit> sift_sarg(std::vector<PulseRecord>& records,
                                 const std::vector<SargAnnouncement>& announcements) {
    if (announcements.size() != records.size()) {
        throw std::invalid_argument("sift_sarg: one announcement per record required");
    }
    std::vector<SiftedBit> sifted;
    for (std::size_t i = 0; i < records.size(); ++i) {
        PulseRecord& r = records[i];
        const SargAnnouncement& ann = announcements[i];
        if (ann.pulse_id != r.pulse_id) {
            throw std::invalid_argument("sift_sarg: announcement/record pulse id mismatch");
        }
        if (ann.first.basis == ann.second.basis) {
            throw std::invalid_argument("sift_sarg: announced pair must be non-orthogonal");
        }
        const StateRef prepared{r.alice_bit, r.alice_basis};
        if (!(ann.first == prepared) && !(ann.second == prepared)) {
            throw std::invalid_argument("sift_sarg: announced pair must contain the prepared state");
        }
        if (!exactly_one_click(r)) {
            r.sift_status = SiftStatus::Discarded;
            continue;
        }
        const StateRef observed{clicked_outcome(r), r.bob_basis};
        const StateRef* concluded = nullptr;
        if (orthogonal(observed, ann.first)) {
            concluded = &ann.second;  // first excluded
        } else if (orthogonal(observed, ann.second)) {
            concluded = &ann.first;  // second excluded
        }
        if (concluded == nullptr) {
            r.sift_status = SiftStatus::Inconclusive;
            continue;
        }
        r.sift_status = SiftStatus::Kept;
        sifted.push_back({r.pulse_id, basis_bit(r.alice_basis), basis_bit(concluded->basis)});
    }
    return sifted;
}

QberEstimate estimate_qber(const std::vector<SiftedBit>& sifted, double sample_fraction,
                           RandomStream& rng, std::vector<PulseRecord>* records) {
    if (sifted.empty()) {
        throw std::invalid_argument("estimate_qber: sifted key is empty");
    }
    if (!(sample_fraction > 0.0 && sample_fraction < 1.0)) {
        throw std::invalid_argument("estimate_qber: sample_fraction must lie in (0, 1)");
    }
    const std::size_t n = sifted.size();
    const std::size_t k = static_cast<std::size_t>(
        std::min<double>(static_cast<double>(n),
                         std::ceil(sample_fraction * static_cast<double>(n))));

    // Partial Fisher-Yates: the first k slots become the disclosed sample.
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + rng.uniform_below(n - i);
        std::swap(order[i], order[j]);
    }

    std::vector<bool> disclosed(n, false);
    std::size_t errors = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const SiftedBit& bit = sifted[order[i]];
        disclosed[order[i]] = true;
        if (bit.alice_value != bit.bob_value) {
            ++errors;
        }
        if (records != nullptr) {
            records->at(bit.pulse_id).disclosed = true;
        }
    }

    QberEstimate est;
    est.disclosed = k;
    est.qber = static_cast<double>(errors) / static_cast<double>(k);
    est.std_error = std::sqrt(est.qber * (1.0 - est.qber) / static_cast<double>(k));
    est.remaining.reserve(n - k);
    for (std::size_t i = 0; i < n; ++i) {
        if (!disclosed[i]) {
            est.remaining.push_back(sifted[i]);
        }
    }
    return est;
}

void SessionConfig::validate() const {
    if (pulses < 1) {
        throw std::invalid_argument("config: pulses must be >= 1");
    }
    if (!(sample_fraction > 0.0 && sample_fraction < 1.0)) {
        throw std::invalid_argument("config: sample_fraction must lie in (0, 1)");
    }
    if (const auto* wcs = std::get_if<WeakCoherentSource>(&source)) {
        if (!(wcs->mu >= 0.0)) {
            throw std::invalid_argument("config: source.mu must be >= 0");
        }
    } else {
        const auto& t = std::get<TruncatedSource>(source);
        if (!(t.p1 >= 0.0) || !(t.p_multi >= 0.0) || t.p1 + t.p_multi > 1.0) {
            throw std::invalid_argument(
                "config: source.p1/source.p_multi must be >= 0 and sum to <= 1");
        }
    }
    if (!(channel.attenuation_db_per_km >= 0.0)) {
        throw std::invalid_argument("config: channel.attenuation_db_per_km must be >= 0");
    }
    if (!(channel.length_km >= 0.0)) {
        throw std::invalid_argument("config: channel.length_km must be >= 0");
    }
    if (!(detector.efficiency >= 0.0 && detector.efficiency <= 1.0)) {
        throw std::invalid_argument("config: detector.efficiency must lie in [0, 1]");
    }
    if (!(detector.dark_prob >= 0.0 && detector.dark_prob <= 1.0)) {
        throw std::invalid_argument("config: detector.dark_prob must lie in [0, 1]");
    }
    if (!(visibility >= 0.0 && visibility <= 1.0)) {
        throw std::invalid_argument("config: optics.visibility must lie in [0, 1]");
    }
    if (!(eve.omega >= 0.0 && eve.omega <= 1.0)) {
        throw std::invalid_argument("config: eve.omega must lie in [0, 1]");
    }
    if (!(coincidence_factor >= 1.0)) {
        throw std::invalid_argument("config: monitor.coincidence_factor must be >= 1");
    }
    if (monitor_window > pulses) {
        throw std::invalid_argument("config: monitor.window must be <= pulses");
    }
    if (!(watchdog_tap_fraction >= 0.0 && watchdog_tap_fraction <= 1.0)) {
        throw std::invalid_argument("config: watchdog.tap_fraction must lie in [0, 1]");
    }
    if (!(watchdog_nominal_energy >= 0.0)) {
        throw std::invalid_argument("config: watchdog.nominal_pulse_energy must be >= 0");
    }
    if (!(watchdog_energy_threshold >= 0.0)) {
        throw std::invalid_argument("config: watchdog.energy_threshold must be >= 0");
    }
    if (!(error_correction_f >= 1.0)) {
        throw std::invalid_argument("config: analysis.error_correction_f must be >= 1");
    }
}

double SessionConfig::effective_watchdog_threshold() const {
    if (watchdog_energy_threshold > 0.0) {
        return watchdog_energy_threshold;
    }
    return 10.0 * watchdog_tap_fraction * watchdog_nominal_energy;
}

SessionResult run_session(const SessionConfig& config, const EveStrategy& eve,
                          RandomStream root, const RecordSink& sink) {
    config.validate();

    const double t = transmittance(config.channel);
    const double vis = config.visibility;
    PnsPolicy pns_policy;
    if (eve.kind == EveKind::Pns) {
        pns_policy = PnsPolicy::derive(config.source, t, config.detector);
    }

    std::vector<PulseRecord> records;
    records.reserve(config.pulses);
    std::vector<SargAnnouncement> announcements;
    const bool sarg = config.protocol == ProtocolKind::Sarg;
    if (sarg) {
        announcements.reserve(config.pulses);
    }
    std::vector<GateClicks> clicks;
    clicks.reserve(config.pulses);
    EveKnowledge knowledge;

    for (std::uint64_t i = 0; i < config.pulses; ++i) {
        const RandomStream pulse = root.child(i);

        RandomStream alice_rng = pulse.child(kStageAlice);
        const int a_bit = alice_rng.uniform_bit();
        const Basis a_basis = alice_rng.uniform_bit() ? Basis::Y : Basis::X;

        RandomStream source_rng = pulse.child(kStageSource);
        const int n_emitted = sample_photon_number(config.source, source_rng);

        QubitState state = prepare_state(a_bit, a_basis);
        EveActionRecord eve_rec;
        bool forwarded_lossless = false;
        int n_into_channel = n_emitted;

        {
            RandomStream eve_rng = pulse.child(kStageEve);
            switch (eve.kind) {
                case EveKind::None:
                    break;
                case EveKind::InterceptResend:
                    if (n_emitted > 0) {
                        const InterceptResendOutcome ir =
                            intercept_resend(state, eve.omega, eve_rng);
                        if (ir.attacked) {
                            state = ir.forwarded;
                            eve_rec.tag = EveActionRecord::Tag::InterceptResend;
                            eve_rec.ir_basis = ir.basis;
                            eve_rec.ir_outcome = ir.outcome;
                            EveEntry entry;
                            entry.pulse_id = i;
                            entry.measured_basis = ir.basis;
                            entry.measured_outcome = ir.outcome;
                            knowledge.push_back(entry);
                        }
                    }
                    break;
                case EveKind::Pns: {
                    switch (pns_attack(n_emitted, pns_policy, eve_rng)) {
                        case PnsAction::Block:
                            eve_rec.tag = EveActionRecord::Tag::PnsBlock;
                            n_into_channel = 0;
                            break;
                        case PnsAction::SplitAndForward: {
                            eve_rec.tag = EveActionRecord::Tag::PnsForward;
                            forwarded_lossless = true;
                            n_into_channel = n_emitted - 1;
                            EveEntry entry;
                            entry.pulse_id = i;
                            entry.has_stored_state = true;
                            entry.stored = StateRef{a_bit, a_basis};
                            knowledge.push_back(entry);
                            break;
                        }
                        case PnsAction::Pass:
                            eve_rec.tag = n_emitted > 0 ? EveActionRecord::Tag::PnsPass
                                                        : EveActionRecord::Tag::None;
                            break;
                    }
                    break;
                }
            }
        }

        int arriving = 0;
        if (forwarded_lossless) {
            arriving = n_into_channel;
        } else if (n_into_channel > 0) {
            RandomStream channel_rng = pulse.child(kStageChannel);
            for (int k = 0; k < n_into_channel; ++k) {
                arriving += channel_rng.bernoulli(t) ? 1 : 0;
            }
        }

        RandomStream basis_rng = pulse.child(kStageBobBasis);
        const Basis b_basis = basis_rng.uniform_bit() ? Basis::Y : Basis::X;

        int at_port0 = 0;
        if (arriving > 0) {
            RandomStream measure_rng = pulse.child(kStageMeasure);
            // Imperfect interference contrast: with probability (1 - V) a
            // photon exits a uniformly random port instead of the Born port.
            const double p0 =
                vis * born_probability(state, b_basis, 0) + (1.0 - vis) * 0.5;
            for (int k = 0; k < arriving; ++k) {
                at_port0 += measure_rng.bernoulli(p0) ? 1 : 0;
            }
        }

        RandomStream detect_rng = pulse.child(kStageDetect);
        const bool c0 = detect(at_port0, config.detector, detect_rng);
        const bool c1 = detect(arriving - at_port0, config.detector, detect_rng);

        PulseRecord rec;
        rec.pulse_id = i;
        rec.alice_bit = a_bit;
        rec.alice_basis = a_basis;
        rec.photon_number = n_emitted;
        rec.eve = eve_rec;
        rec.bob_basis = b_basis;
        rec.click0 = c0;
        rec.click1 = c1;

        if (sarg) {
            RandomStream announce_rng = pulse.child(kStageAnnounce);
            const StateRef partner{announce_rng.uniform_bit(), other_basis(a_basis)};
            announcements.push_back({i, StateRef{a_bit, a_basis}, partner});
            rec.has_announcement = true;
            rec.announced_partner = partner;
        }

        records.push_back(rec);
        clicks.push_back({c0, c1});
    }

    std::vector<SiftedBit> sifted =
        sarg ? sift_sarg(records, announcements) : sift_bb84(records);

    SessionResult result;
    result.pulses_sent = config.pulses;
    for (const GateClicks& g : clicks) {
        result.bob_detections += (g.d0 || g.d1) ? 1 : 0;
        result.double_clicks += (g.d0 && g.d1) ? 1 : 0;
    }
    result.sifted_length = sifted.size();
    result.detection_rate =
        static_cast<double>(result.bob_detections) / static_cast<double>(config.pulses);
    result.sifted_rate =
        static_cast<double>(result.sifted_length) / static_cast<double>(config.pulses);

    if (!sifted.empty()) {
        RandomStream qber_rng = root.child(kQberStream);
        const QberEstimate est =
            estimate_qber(sifted, config.sample_fraction, qber_rng, &records);
        result.qber = est.qber;
        result.qber_std_error = est.std_error;
        result.disclosed_count = est.disclosed;
        result.remaining_key_length = est.remaining.size();
        result.qber_above_individual_threshold = est.qber > individual_attack_threshold();
        result.qber_above_shor_preskill_threshold = est.qber > shor_preskill_threshold();
    }

    {
        const std::uint64_t window =
            config.monitor_window == 0 ? config.pulses : config.monitor_window;
        const CoincidenceMonitor monitor{config.coincidence_factor,
                                         static_cast<std::size_t>(window)};
        result.coincidence_alarm =
            coincidence_check(clicks, monitor) == MonitorVerdict::Alarm;
    }

    // Eve's accounting over the sifted positions. Realized knowledge comes
    // from measuring stored photons after the public reveal; the expected
    // accounting values a stored bit at its information content (1 after a
    // basis reveal, the discrimination success probability after a pair
    // reveal) and an intercept-resend bit at 1 iff Eve's basis matched.
    if (!knowledge.empty() && !sifted.empty()) {
        std::vector<bool> in_sifted(config.pulses, false);
        for (const SiftedBit& b : sifted) {
            in_sifted[b.pulse_id] = true;
        }

        double expected_info = 0.0;
        std::uint64_t ir_in_sifted = 0;
        std::uint64_t ir_matches = 0;
        bool any_stored = false;
        for (const EveEntry& entry : knowledge) {
            if (entry.has_stored_state) {
                any_stored = true;
                result.eve_stored_pulses += 1;
            }
            if (!in_sifted[entry.pulse_id]) {
                continue;
            }
            const PulseRecord& rec = records[entry.pulse_id];
            if (entry.has_stored_state) {
                expected_info += sarg ? kUsdInfoPerBit : 1.0;
            } else {
                if (entry.measured_basis == rec.alice_basis) {
                    expected_info += 1.0;
                }
                ++ir_in_sifted;
                if (!sarg && entry.measured_outcome == rec.alice_bit) {
                    ++ir_matches;
                }
            }
        }
        result.eve_info_per_sifted_bit =
            expected_info / static_cast<double>(sifted.size());
        if (ir_in_sifted > 0) {
            result.eve_guess_accuracy =
                static_cast<double>(ir_matches) / static_cast<double>(ir_in_sifted);
        }

        if (any_stored) {
            std::vector<Announcement> revealed(config.pulses);
            for (std::uint64_t i = 0; i < config.pulses; ++i) {
                if (sarg) {
                    revealed[i] = Announcement{Announcement::Kind::PairReveal, Basis::X,
                                               announcements[i].first,
                                               announcements[i].second};
                } else {
                    revealed[i] = Announcement{Announcement::Kind::BasisReveal,
                                               records[i].alice_basis, {}, {}};
                }
            }
            RandomStream reveal_rng = root.child(kRevealStream);
            const std::vector<EveBitKnowledge> realized =
                eve_measure_after_reveal(knowledge, revealed, reveal_rng);
            for (const EveBitKnowledge& k : realized) {
                if (k.conclusive && in_sifted[k.pulse_id]) {
                    result.eve_known_sifted_bits += 1;
                }
            }
        }
    } else {
        for (const EveEntry& entry : knowledge) {
            result.eve_stored_pulses += entry.has_stored_state ? 1 : 0;
        }
    }

    if (sink) {
        for (const PulseRecord& rec : records) {
            sink(rec);
        }
    }
    return result;
}

}  // namespace qkd
