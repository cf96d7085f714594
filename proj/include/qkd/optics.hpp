#pragma once

#include <array>
#include <vector>

#include "qkd/quantum.hpp"

namespace qkd {

// Interference visibility in [0, 1]; 1 is a perfectly aligned system.
class Visibility {
public:
    explicit Visibility(double v);
    double value() const { return v_; }

private:
    double v_;
};

// Unbalanced Mach-Zehnder stage: two couplers joined by a short arm and a
// long arm. `delay` is the long-minus-short difference in whole time bins
// (>= 1) and `phase` the extra optical phase e^{i phase} picked up on the
// long arm. Couplings are the cross-coupled power fractions (0.5 = 50/50).
struct Interferometer {
    double phase = 0.0;
    int delay = 1;
    double input_coupling = 0.5;
    double output_coupling = 0.5;

    Interferometer(double phase, int delay, double input_coupling = 0.5,
                   double output_coupling = 0.5);
};

// Complex amplitude per (output port, time bin) for a single photon spread
// over time bins by interferometer stages. Bins outside the stored range
// read as zero. Total probability can drop below 1 once a port has been
// discarded (post-selection).
class TimeBinAmplitudes {
public:
    explicit TimeBinAmplitudes(int num_bins = 0);

    // Unit amplitude in one (port, bin) cell.
    static TimeBinAmplitudes single_pulse(int port = 0, int bin = 0);

    Complex at(int port, int bin) const;
    void set(int port, int bin, Complex a);
    void add(int port, int bin, Complex a);

    int num_bins() const { return static_cast<int>(port_[0].size()); }
    double total_probability() const;

    // Keep one output fiber and discard the other (the discarded port's
    // probability is lost, as in a routed/post-selected measurement).
    TimeBinAmplitudes selected_port(int port) const;

private:
    std::array<std::vector<Complex>, 2> port_;
};

// Propagate amplitudes through one interferometer stage. Port 0/1 of the
// input feed the two inputs of the entry coupler; lossless, so total
// probability is preserved to 1e-12.
TimeBinAmplitudes propagate(const TimeBinAmplitudes& input, const Interferometer& dev);

// Two-photon coincidence peaks for a folded unbalanced-interferometer pair
// fed by a pair source: early/late lateral peaks and the interfering central
// peak. Detector indices are 0/1 on each side.
enum class Peak : int { Early = 0, Central = 1, Late = 2 };

class CoincidenceDistribution {
public:
    // probs[peak][2*det_a + det_b]; validated non-negative, sums to 1.
    CoincidenceDistribution(const std::array<std::array<double, 4>, 3>& probs);

    double prob(Peak peak, int det_a, int det_b) const;
    double peak_prob(Peak peak) const;

private:
    std::array<std::array<double, 4>, 3> p_;
};

// Coincidence distribution for analyzer phases (phase_a, phase_b) and
// fringe visibility v, with 50/50 couplers: lateral peaks carry 1/4 each
// (phase-independent, detectors uncorrelated), the central peak carries 1/2
// with same-detector probability (1 + v cos(phase_a + phase_b)) / 2.
// The phases add because both photons of a pair travel the same arm pair;
// a pair source fires with probability ~0.1 per pump pulse in practice and
// the distribution below is conditioned on a detected pair.
CoincidenceDistribution franson_coincidence(double phase_a, double phase_b, Visibility v);

// Go-and-return (auto-compensated) link: click probabilities for Bob's two
// detectors given the two modulator phases. Detector 0 is the constructive
// port at zero phase difference:
//   p0 = (1 + v cos(phase_bob - phase_alice)) / 2,  p1 = 1 - p0.
std::array<double, 2> plug_and_play_click_prob(double phase_bob, double phase_alice,
                                               Visibility v);

// Optical error rate of an interferometric link with fringe visibility v:
// (1 - v) / 2. (At v = 99.8% this gives 0.1%.)
double qber_from_visibility(Visibility v);

// Largest CHSH value reachable with correlation E = v cos(a + b): 2 sqrt(2) v.
double chsh_value(Visibility v);

}  // namespace qkd
