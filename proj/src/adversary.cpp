#include "qkd/adversary.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace qkd {

QubitState to_state(const StateRef& ref) {
    return prepare_state(ref.bit, ref.basis);
}

std::string to_label(const StateRef& ref) {
    std::string s;
    s += ref.bit == 0 ? '+' : '-';
    s += ref.basis == Basis::X ? 'x' : 'y';
    return s;
}

StateRef state_ref_from_label(const std::string& label) {
    if (label.size() != 2 || (label[0] != '+' && label[0] != '-') ||
        (label[1] != 'x' && label[1] != 'y')) {
        throw std::invalid_argument("state_ref_from_label: expected one of +x,-x,+y,-y");
    }
    return StateRef{label[0] == '+' ? 0 : 1, label[1] == 'x' ? Basis::X : Basis::Y};
}

bool orthogonal(const StateRef& a, const StateRef& b) {
    return a.basis == b.basis && a.bit != b.bit;
}

int basis_bit(Basis basis) {
    return static_cast<int>(basis);
}

EveStrategy EveStrategy::none() {
    return EveStrategy{EveKind::None, 0.0};
}

EveStrategy EveStrategy::intercept_resend(double omega) {
    if (!(omega >= 0.0 && omega <= 1.0)) {
        throw std::invalid_argument("EveStrategy: omega must lie in [0, 1]");
    }
    return EveStrategy{EveKind::InterceptResend, omega};
}

EveStrategy EveStrategy::pns() {
    return EveStrategy{EveKind::Pns, 0.0};
}

InterceptResendOutcome intercept_resend(const QubitState& state, double omega,
                                        RandomStream& rng) {
    if (!(omega >= 0.0 && omega <= 1.0)) {
        throw std::invalid_argument("intercept_resend: omega must lie in [0, 1]");
    }
    InterceptResendOutcome out{state, false, Basis::X, 0};
    if (omega > 0.0 && rng.next_double() < omega) {
        const Basis basis = rng.uniform_bit() ? Basis::Y : Basis::X;
        const int outcome = measure(state, basis, rng);
        out.forwarded = prepare_state(outcome, basis);
        out.attacked = true;
        out.basis = basis;
        out.outcome = outcome;
    }
    return out;
}

PnsPolicy PnsPolicy::derive(const PhotonSource& src, double channel_transmittance,
                            const Detector& det) {
    const double eta = det.efficiency;
    const double t = channel_transmittance;
    const double x = 1.0 - eta;

    // Click-miss factors F such that P(any click) = 1 - (1-dark)^2 * F.
    // Honest: photons go through the fiber, F_h = E[(1 - eta t)^n].
    const double f_honest = photon_number_pgf(src, 1.0 - eta * t);

    // Full number splitting: vacuum and singles give Bob nothing; a
    // multi-photon pulse arrives losslessly minus the stored photon.
    const double p0 = photon_number_prob(src, 0);
    const double p1 = photon_number_prob(src, 1);
    double fwd = 0.0;     // sum_{n>=2} P(n) x^(n-1)
    double pmulti = 0.0;  // P(n>=2)
    for (int n = 2; n < 200; ++n) {
        const double pn = photon_number_prob(src, n);
        if (pn < 1e-18 && n > 8) {
            break;
        }
        fwd += pn * std::pow(x, n - 1);
        pmulti += pn;
    }
    const double f_full = p0 + p1 + fwd;

    PnsPolicy policy;
    const double dark2 = (1.0 - det.dark_prob) * (1.0 - det.dark_prob);
    policy.honest_detection_prob = 1.0 - dark2 * f_honest;
    policy.full_pns_detection_prob = 1.0 - dark2 * f_full;

    // Detection boost of forwarding one multi-photon pulse vs blocking it.
    const double boost = pmulti - fwd;
    if (f_full <= f_honest) {
        // Surplus: forwarding everything would overshoot the honest rate;
        // block a fraction of multi-photon pulses as well.
        policy.forward_multi_prob = boost > 0.0 ? (1.0 - f_honest) / boost : 0.0;
        policy.pass_single_prob = 0.0;
    } else {
        // Deficit: forward every multi-photon pulse and top the rate up by
        // passing singles untouched. Saturates at 1 when unreachable.
        policy.forward_multi_prob = 1.0;
        const double per_single = p1 * eta * t;
        policy.pass_single_prob =
            per_single > 0.0 ? std::min(1.0, (f_full - f_honest) / per_single) : 1.0;
    }
    return policy;
}

PnsAction pns_attack(int photon_number, const PnsPolicy& policy, RandomStream& rng) {
    if (photon_number < 0) {
        throw std::invalid_argument("pns_attack: photon count must be >= 0");
    }
    if (photon_number == 0) {
        return PnsAction::Pass;
    }
    if (photon_number == 1) {
        return rng.bernoulli(policy.pass_single_prob) ? PnsAction::Pass : PnsAction::Block;
    }
    return rng.bernoulli(policy.forward_multi_prob) ? PnsAction::SplitAndForward
                                                    : PnsAction::Block;
}

std::vector<EveBitKnowledge> eve_measure_after_reveal(
    const EveKnowledge& knowledge, const std::vector<Announcement>& revealed,
    RandomStream& rng) {
    std::vector<EveBitKnowledge> out;
    out.reserve(knowledge.size());
    for (const EveEntry& entry : knowledge) {
        if (!entry.has_stored_state) {
            throw std::invalid_argument(
                "eve_measure_after_reveal: entry has no stored state");
        }
        if (entry.pulse_id >= revealed.size()) {
            throw std::out_of_range("eve_measure_after_reveal: pulse id not revealed");
        }
        const Announcement& ann = revealed[entry.pulse_id];
        if (ann.kind == Announcement::Kind::BasisReveal) {
            // The stored photon is an eigenstate of the revealed basis, so
            // the Born draw is deterministic and equals Alice's bit.
            const int bit = measure(to_state(entry.stored), ann.basis, rng);
            out.push_back({entry.pulse_id, true, bit});
        } else {
            if (ann.pair_first.basis == ann.pair_second.basis) {
                throw std::invalid_argument(
                    "eve_measure_after_reveal: announced pair must be non-orthogonal");
            }
            if (!(entry.stored == ann.pair_first) && !(entry.stored == ann.pair_second)) {
                throw std::invalid_argument(
                    "eve_measure_after_reveal: stored state not among the announced pair");
            }
            const double overlap =
                std::abs(inner(to_state(ann.pair_first), to_state(ann.pair_second)));
            const bool conclusive = rng.bernoulli(1.0 - overlap);
            // Unambiguous discrimination never errs: success identifies the
            // stored state, whose basis index is the key bit.
            out.push_back({entry.pulse_id, conclusive,
                           conclusive ? basis_bit(entry.stored.basis) : -1});
        }
    }
    return out;
}

InfoCurvePoint individual_attack_curves(double d) {
    if (!(d >= 0.0 && d <= 0.5)) {
        throw std::domain_error("individual_attack_curves: d must lie in [0, 1/2]");
    }
    InfoCurvePoint p;
    p.d = d;
    p.i_ab = 1.0 - binary_entropy(d);
    p.i_ae = 1.0 - binary_entropy(0.5 + std::sqrt(d * (1.0 - d)));
    return p;
}

namespace {

double bisect_root(const std::function<double(double)>& f, double lo, double hi) {
    double flo = f(lo);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = f(mid);
        if ((flo <= 0.0) == (fmid <= 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double individual_attack_threshold() {
    static const double value = bisect_root(
        [](double d) {
            const InfoCurvePoint p = individual_attack_curves(d);
            return p.i_ab - p.i_ae;
        },
        1e-9, 0.5 - 1e-9);
    return value;
}

double shor_preskill_threshold() {
    static const double value = bisect_root(
        [](double d) { return 1.0 - 2.0 * binary_entropy(d); }, 1e-9, 0.5 - 1e-9);
    return value;
}

}  // namespace qkd
