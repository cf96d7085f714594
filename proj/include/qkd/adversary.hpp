#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qkd/devices.hpp"
#include "qkd/quantum.hpp"

namespace qkd {

// One of the four protocol states, named by its preparation (bit, basis).
struct StateRef {
    int bit = 0;
    Basis basis = Basis::X;

    friend bool operator==(const StateRef&, const StateRef&) = default;
};

QubitState to_state(const StateRef& ref);
// "+x", "-x", "+y", "-y"
std::string to_label(const StateRef& ref);
StateRef state_ref_from_label(const std::string& label);
// Same basis, opposite sign.
bool orthogonal(const StateRef& a, const StateRef& b);
// The key bit a state encodes under the pair-announcement protocol:
// the basis index of the prepared state (X -> 0, Y -> 1).
int basis_bit(Basis basis);

enum class EveKind { None, InterceptResend, Pns };

struct EveStrategy {
    EveKind kind = EveKind::None;
    // Fraction of pulses attacked (intercept-resend only).
    double omega = 1.0;

    static EveStrategy none();
    static EveStrategy intercept_resend(double omega);
    static EveStrategy pns();
};

// What Eve holds about one pulse: either a photon kept in perfect quantum
// memory (number splitting) or the result of an immediate measurement
// (intercept-resend: basis + outcome).
struct EveEntry {
    std::uint64_t pulse_id = 0;
    bool has_stored_state = false;
    StateRef stored{};
    Basis measured_basis = Basis::X;
    int measured_outcome = 0;
};

using EveKnowledge = std::vector<EveEntry>;

// Public disclosure for one pulse, as Eve hears it: BB84 reveals the
// preparation basis, the pair protocol reveals two non-orthogonal
// candidate states.
struct Announcement {
    enum class Kind { BasisReveal, PairReveal };

    Kind kind = Kind::BasisReveal;
    Basis basis = Basis::X;
    StateRef pair_first{};
    StateRef pair_second{};
};

// Result of intercept_resend on one pulse.
struct InterceptResendOutcome {
    QubitState forwarded;
    bool attacked = false;
    Basis basis = Basis::X;
    int outcome = 0;
};

// With probability omega, measure the in-flight state in a uniformly random
// basis and forward the observed eigenstate; otherwise pass it untouched.
// omega = 0 consumes no randomness and is an exact identity.
InterceptResendOutcome intercept_resend(const QubitState& state, double omega,
                                        RandomStream& rng);

enum class PnsAction { Block, SplitAndForward, Pass };

// Number-splitting rate budget. Eve blocks single-photon pulses and forwards
// multi-photon pulses minus one stored photon over a lossless channel, tuned
// so Bob's expected detection rate matches the honest channel:
//   - surplus regime (forwarding everything would raise Bob's rate): forward
//     a multi-photon pulse only with probability forward_multi_prob;
//   - deficit regime (multi-photon pulses alone cannot sustain the rate):
//     pass a fraction pass_single_prob of single-photon pulses untouched.
// At very low loss even passing every single cannot compensate, the policy
// saturates, and the residual rate dip is Bob's evidence of the attack.
struct PnsPolicy {
    double forward_multi_prob = 1.0;
    double pass_single_prob = 0.0;
    double honest_detection_prob = 0.0;
    double full_pns_detection_prob = 0.0;

    // True when multi-photon pulses alone can sustain Bob's rate, i.e. Eve
    // can block every single-photon pulse without lowering the detection
    // rate (the surplus regime: no singles need to be passed).
    bool full_pns_feasible() const { return pass_single_prob <= 0.0; }

    static PnsPolicy derive(const PhotonSource& src, double channel_transmittance,
                            const Detector& det);
};

// Decide the action for one pulse. Vacuum pulses pass (nothing to steal).
PnsAction pns_attack(int photon_number, const PnsPolicy& policy, RandomStream& rng);

// Eve's per-pulse key knowledge once the public discussion has happened.
struct EveBitKnowledge {
    std::uint64_t pulse_id = 0;
    bool conclusive = false;
    int bit = -1;  // valid only when conclusive
};

// Measure stored photons after the reveal. Basis reveal: measure in the
// announced basis (deterministically yields the prepared bit). Pair reveal:
// unambiguous discrimination of the two candidates succeeds with probability
// 1 - |<a|b>| and never errs. `revealed` is indexed by pulse id. Entries
// without a stored state are rejected.
std::vector<EveBitKnowledge> eve_measure_after_reveal(
    const EveKnowledge& knowledge, const std::vector<Announcement>& revealed,
    RandomStream& rng);

// Per-bit information of the optimal individual (incoherent) attack at
// disturbance d: i_ab = 1 - h(d), i_ae = 1 - h(1/2 + sqrt(d(1-d))).
struct InfoCurvePoint {
    double d = 0.0;
    double i_ab = 0.0;
    double i_ae = 0.0;
};

InfoCurvePoint individual_attack_curves(double d);

// Disturbance where i_ab crosses i_ae (~0.1464): above it no one-way
// advantage remains against individual attacks.
double individual_attack_threshold();

// Root of 1 - 2 h(d) (~0.1100): the entanglement-purification style
// one-way bound.
double shor_preskill_threshold();

}  // namespace qkd
