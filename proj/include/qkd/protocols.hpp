#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "qkd/adversary.hpp"
#include "qkd/devices.hpp"
#include "qkd/quantum.hpp"

namespace qkd {

enum class ProtocolKind { Bb84, Sarg };

const char* to_string(ProtocolKind p);

// Which leakage accounting the key-rate computation uses.
enum class LeakageModel { IndividualAttack, ShorPreskill };

enum class SiftStatus { Kept, Discarded, Inconclusive };

// What Eve did to one pulse, as recorded in the audit log.
struct EveActionRecord {
    enum class Tag { None, InterceptResend, PnsBlock, PnsForward, PnsPass };

    Tag tag = Tag::None;
    Basis ir_basis = Basis::X;  // intercept-resend payload
    int ir_outcome = 0;
};

// Full per-pulse audit record. pulse ids are dense 0..N-1 and index the
// session's record vector directly.
struct PulseRecord {
    std::uint64_t pulse_id = 0;
    int alice_bit = 0;
    Basis alice_basis = Basis::X;
    int photon_number = 0;
    EveActionRecord eve{};
    Basis bob_basis = Basis::X;
    bool click0 = false;
    bool click1 = false;
    SiftStatus sift_status = SiftStatus::Discarded;
    bool disclosed = false;
    // Pair-protocol public announcement (the prepared state is implicit in
    // alice_bit/alice_basis; the partner is the other announced candidate).
    bool has_announcement = false;
    StateRef announced_partner{};
};

// Alice's public pair announcement for one pulse: the prepared state plus a
// non-orthogonal partner from the other basis.
struct SargAnnouncement {
    std::uint64_t pulse_id = 0;
    StateRef first{};
    StateRef second{};
};

struct SiftedBit {
    std::uint64_t pulse_id = 0;
    int alice_value = 0;
    int bob_value = 0;
};

// BB84 sifting: keep a pulse iff exactly one detector clicked and the bases
// match; double clicks are discarded (they still feed the coincidence
// monitor). Sets sift_status on every record and returns the kept bits.
std::vector<SiftedBit> sift_bb84(std::vector<PulseRecord>& records);

// Pair-protocol sifting. Bob is conclusive iff exactly one detector clicked
// and his observed eigenstate is orthogonal to one announced candidate: that
// candidate is excluded, the other one was sent. Key bits are the basis
// index of the prepared state (X -> 0, Y -> 1). Status is Kept for
// conclusive outcomes, Inconclusive for single clicks compatible with both
// candidates, Discarded otherwise. The announced pair must consist of two
// non-orthogonal states including the prepared one.
std::vector<SiftedBit> sift_sarg(std::vector<PulseRecord>& records,
                                 const std::vector<SargAnnouncement>& announcements);

struct QberEstimate {
    double qber = 0.0;
    double std_error = 0.0;
    std::size_t disclosed = 0;
    std::vector<SiftedBit> remaining;
};

// Disclose ceil(sample_fraction * n) sifted bits chosen uniformly without
// replacement, compare them, and return the estimate with its binomial
// standard error plus the undisclosed remainder. Marks disclosed pulses in
// `records` when given (records must be indexed by pulse id). Rejects an
// empty sifted key and sample_fraction outside (0, 1).
QberEstimate estimate_qber(const std::vector<SiftedBit>& sifted, double sample_fraction,
                           RandomStream& rng, std::vector<PulseRecord>* records = nullptr);

// Everything a session needs. Defaults describe an ideal short link.
struct SessionConfig {
    ProtocolKind protocol = ProtocolKind::Bb84;
    std::uint64_t pulses = 100000;
    std::uint64_t seed = 1;
    double sample_fraction = 0.5;
    PhotonSource source = WeakCoherentSource{0.1};
    FiberChannel channel{0.25, 0.0};
    Detector detector{1.0, 0.0, "bob"};
    double visibility = 1.0;
    EveStrategy eve = EveStrategy::none();
    double coincidence_factor = 3.0;
    std::uint64_t monitor_window = 0;  // 0 = whole session
    double watchdog_tap_fraction = 0.9;
    double watchdog_nominal_energy = 1e6;
    double watchdog_energy_threshold = 0.0;  // 0 = derive as 10x tapped nominal
    double error_correction_f = 1.0;
    LeakageModel leakage = LeakageModel::IndividualAttack;

    // Throws std::invalid_argument naming the offending dotted field.
    void validate() const;
    double effective_watchdog_threshold() const;
};

struct SessionResult {
    std::uint64_t pulses_sent = 0;
    std::uint64_t bob_detections = 0;  // gates with at least one click
    std::uint64_t double_clicks = 0;
    std::uint64_t sifted_length = 0;
    std::uint64_t disclosed_count = 0;
    std::uint64_t remaining_key_length = 0;
    double qber = 0.0;
    double qber_std_error = 0.0;
    double detection_rate = 0.0;  // per emitted pulse
    double sifted_rate = 0.0;     // per emitted pulse
    bool coincidence_alarm = false;
    bool qber_above_individual_threshold = false;
    bool qber_above_shor_preskill_threshold = false;

    // Eavesdropper accounting.
    std::uint64_t eve_stored_pulses = 0;
    std::uint64_t eve_known_sifted_bits = 0;  // realized post-reveal measurement
    double eve_info_per_sifted_bit = 0.0;     // expected-value accounting
    double eve_guess_accuracy = 0.0;          // intercept-resend, BB84

    // Filled by the analysis layer (negative until attached).
    double secret_rate_individual = -1.0;
    double secret_rate_shor_preskill = -1.0;

    bool any_alarm() const { return coincidence_alarm; }
};

using RecordSink = std::function<void(const PulseRecord&)>;

// Run one discrete-event session: per pulse Alice draws bit/basis and a
// photon number, Eve acts, the fiber thins the pulse, Bob picks a basis and
// his two gated detectors fire; then sifting, error sampling, the
// coincidence monitor and Eve's post-reveal measurement run over the whole
// log. Every stage draws from its own substream of `root`, so shared stages
// consume identical randomness across protocols and strategies. The sink,
// when given, receives every record after sift/disclosure marking.
SessionResult run_session(const SessionConfig& config, const EveStrategy& eve,
                          RandomStream root, const RecordSink& sink = {});

}  // namespace qkd
