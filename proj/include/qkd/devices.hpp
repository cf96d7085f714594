#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>

#include "qkd/random.hpp"

namespace qkd {

// Attenuated laser pulse: photon number is Poisson with mean mu per pulse.
struct WeakCoherentSource {
    double mu = 0.1;

    explicit WeakCoherentSource(double mu_);
};

// Sub-Poissonian ("single-photon") source, modeled as a truncated number
// distribution: emits 1 photon with probability p1, exactly 2 with
// probability p_multi, vacuum otherwise.
struct TruncatedSource {
    double p1 = 1.0;
    double p_multi = 0.0;

    TruncatedSource(double p1_, double p_multi_);
};

using PhotonSource = std::variant<WeakCoherentSource, TruncatedSource>;

int sample_photon_number(const WeakCoherentSource& src, RandomStream& rng);
int sample_photon_number(const PhotonSource& src, RandomStream& rng);

// P(n = k) and tail/pgf helpers used by attack budgeting and tests.
double photon_number_prob(const PhotonSource& src, int k);
double prob_single(const PhotonSource& src);
double prob_at_least_two(const PhotonSource& src);
// E[x^n] for x in [0, 1] (probability generating function).
double photon_number_pgf(const PhotonSource& src, double x);

// Fiber span with exponential (dB-linear) loss.
struct FiberChannel {
    double attenuation_db_per_km = 0.25;
    double length_km = 0.0;

    FiberChannel(double attenuation_db_per_km_, double length_km_);
};

// Power transmittance 10^(-attenuation * length / 10).
double transmittance(const FiberChannel& channel);

// Threshold single-photon detector: each arriving photon fires it with
// probability `efficiency`, and every gate can also fire from a dark count.
struct Detector {
    double efficiency = 1.0;
    double dark_prob = 0.0;
    std::string label = "det";

    Detector(double efficiency_, double dark_prob_, std::string label_ = "det");
};

// P(click | n photons arriving) = 1 - (1 - efficiency)^n combined with the
// dark count: 1 - (1 - that) * (1 - dark_prob).
double click_probability(int photons_arriving, const Detector& det);

// Sample one gate. Consumes exactly two draws (photon path, dark path) so
// that replay alignment does not depend on the outcome.
bool detect(int photons_arriving, const Detector& det, RandomStream& rng);

enum class MonitorVerdict { Pass, Alarm };

// Incoming-intensity watchdog on the go-and-return entry port: taps off
// `tap_fraction` of every bright pulse and alarms when the tapped energy
// exceeds `energy_threshold` (energies in mean photons per pulse).
struct WatchdogMonitor {
    double tap_fraction = 0.9;
    double energy_threshold = 0.0;

    WatchdogMonitor(double tap_fraction_, double energy_threshold_);
};

MonitorVerdict watchdog_check(double pulse_energy, const WatchdogMonitor& monitor);

// Per-gate click pattern of Bob's two detectors.
struct GateClicks {
    bool d0 = false;
    bool d1 = false;
};

// Double-click (coincidence) rate monitor. The expected accidental
// coincidence count over the window is the product of the two observed
// per-detector click rates times the window length (dark counts enter
// through those rates); the monitor alarms when the observed double-click
// count exceeds `accidental_threshold_factor` times that expectation.
struct CoincidenceMonitor {
    double accidental_threshold_factor = 3.0;
    std::size_t window = 1;

    CoincidenceMonitor(double accidental_threshold_factor_, std::size_t window_);
};

// Evaluates the trailing `window` gates of the log. Rejects logs shorter
// than the window.
MonitorVerdict coincidence_check(std::span<const GateClicks> click_log,
                                 const CoincidenceMonitor& monitor);

// Per-pulse probability that at least one of Bob's two detectors clicks in
// an honest run: photons thinned by `channel_transmittance`, split over two
// detectors with the same efficiency/dark parameters.
double expected_click_prob_two_detectors(const PhotonSource& src,
                                         double channel_transmittance,
                                         const Detector& det);

}  // namespace qkd
