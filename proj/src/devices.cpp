#include "qkd/devices.hpp"

#include <cmath>
#include <stdexcept>

namespace qkd {

WeakCoherentSource::WeakCoherentSource(double mu_) : mu(mu_) {
    if (!(mu >= 0.0)) {
        throw std::invalid_argument("WeakCoherentSource: mu must be >= 0");
    }
}

TruncatedSource::TruncatedSource(double p1_, double p_multi_) : p1(p1_), p_multi(p_multi_) {
    if (!(p1 >= 0.0) || !(p_multi >= 0.0) || p1 + p_multi > 1.0) {
        throw std::invalid_argument(
            "TruncatedSource: need p1 >= 0, p_multi >= 0 and p1 + p_multi <= 1");
    }
}

int sample_photon_number(const WeakCoherentSource& src, RandomStream& rng) {
    return rng.poisson(src.mu);
}

int sample_photon_number(const PhotonSource& src, RandomStream& rng) {
    if (const auto* wcs = std::get_if<WeakCoherentSource>(&src)) {
        return sample_photon_number(*wcs, rng);
    }
    const auto& t = std::get<TruncatedSource>(src);
    const double u = rng.next_double();
    if (u < t.p1) {
        return 1;
    }
    if (u < t.p1 + t.p_multi) {
        return 2;
    }
    return 0;
}

double photon_number_prob(const PhotonSource& src, int k) {
    if (k < 0) {
        throw std::invalid_argument("photon_number_prob: k must be >= 0");
    }
    if (const auto* wcs = std::get_if<WeakCoherentSource>(&src)) {
        double p = std::exp(-wcs->mu);
        for (int i = 1; i <= k; ++i) {
            p *= wcs->mu / i;
        }
        return p;
    }
    const auto& t = std::get<TruncatedSource>(src);
    switch (k) {
        case 0: return 1.0 - t.p1 - t.p_multi;
        case 1: return t.p1;
        case 2: return t.p_multi;
        default: return 0.0;
    }
}

double prob_single(const PhotonSource& src) {
    return photon_number_prob(src, 1);
}

double prob_at_least_two(const PhotonSource& src) {
    if (const auto* wcs = std::get_if<WeakCoherentSource>(&src)) {
        return 1.0 - std::exp(-wcs->mu) * (1.0 + wcs->mu);
    }
    return std::get<TruncatedSource>(src).p_multi;
}

double photon_number_pgf(const PhotonSource& src, double x) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::invalid_argument("photon_number_pgf: x must lie in [0, 1]");
    }
    if (const auto* wcs = std::get_if<WeakCoherentSource>(&src)) {
        return std::exp(-wcs->mu * (1.0 - x));
    }
    const auto& t = std::get<TruncatedSource>(src);
    return (1.0 - t.p1 - t.p_multi) + t.p1 * x + t.p_multi * x * x;
}

FiberChannel::FiberChannel(double attenuation_db_per_km_, double length_km_)
    : attenuation_db_per_km(attenuation_db_per_km_), length_km(length_km_) {
    if (!(attenuation_db_per_km >= 0.0)) {
        throw std::invalid_argument("FiberChannel: attenuation must be >= 0 dB/km");
    }
    if (!(length_km >= 0.0)) {
        throw std::invalid_argument("FiberChannel: length must be >= 0 km");
    }
}

double transmittance(const FiberChannel& channel) {
    return std::pow(10.0, -channel.attenuation_db_per_km * channel.length_km / 10.0);
}

Detector::Detector(double efficiency_, double dark_prob_, std::string label_)
    : efficiency(efficiency_), dark_prob(dark_prob_), label(std::move(label_)) {
    if (!(efficiency >= 0.0 && efficiency <= 1.0)) {
        throw std::invalid_argument("Detector: efficiency must lie in [0, 1]");
    }
    if (!(dark_prob >= 0.0 && dark_prob <= 1.0)) {
        throw std::invalid_argument("Detector: dark_prob must lie in [0, 1]");
    }
}

double click_probability(int photons_arriving, const Detector& det) {
    if (photons_arriving < 0) {
        throw std::invalid_argument("click_probability: photon count must be >= 0");
    }
    const double miss = std::pow(1.0 - det.efficiency, photons_arriving);
    return 1.0 - miss * (1.0 - det.dark_prob);
}

bool detect(int photons_arriving, const Detector& det, RandomStream& rng) {
    if (photons_arriving < 0) {
        throw std::invalid_argument("detect: photon count must be >= 0");
    }
    const double p_photon = 1.0 - std::pow(1.0 - det.efficiency, photons_arriving);
    const bool photon_click = rng.next_double() < p_photon;
    const bool dark_click = rng.next_double() < det.dark_prob;
    return photon_click || dark_click;
}

WatchdogMonitor::WatchdogMonitor(double tap_fraction_, double energy_threshold_)
    : tap_fraction(tap_fraction_), energy_threshold(energy_threshold_) {
    if (!(tap_fraction >= 0.0 && tap_fraction <= 1.0)) {
        throw std::invalid_argument("WatchdogMonitor: tap_fraction must lie in [0, 1]");
    }
    if (!(energy_threshold >= 0.0)) {
        throw std::invalid_argument("WatchdogMonitor: energy_threshold must be >= 0");
    }
}

MonitorVerdict watchdog_check(double pulse_energy, const WatchdogMonitor& monitor) {
    if (!(pulse_energy >= 0.0)) {
        throw std::invalid_argument("watchdog_check: pulse_energy must be >= 0");
    }
    return monitor.tap_fraction * pulse_energy > monitor.energy_threshold
               ? MonitorVerdict::Alarm
               : MonitorVerdict::Pass;
}

CoincidenceMonitor::CoincidenceMonitor(double accidental_threshold_factor_,
                                       std::size_t window_)
    : accidental_threshold_factor(accidental_threshold_factor_), window(window_) {
    if (!(accidental_threshold_factor >= 1.0)) {
        throw std::invalid_argument("CoincidenceMonitor: threshold factor must be >= 1");
    }
    if (window < 1) {
        throw std::invalid_argument("CoincidenceMonitor: window must be >= 1 gate");
    }
}

MonitorVerdict coincidence_check(std::span<const GateClicks> click_log,
                                 const CoincidenceMonitor& monitor) {
    if (click_log.size() < monitor.window) {
        throw std::invalid_argument("coincidence_check: click log shorter than monitor window");
    }
    const std::span<const GateClicks> tail = click_log.last(monitor.window);
    std::size_t n0 = 0;
    std::size_t n1 = 0;
    std::size_t doubles = 0;
    for (const GateClicks& g : tail) {
        n0 += g.d0 ? 1 : 0;
        n1 += g.d1 ? 1 : 0;
        doubles += (g.d0 && g.d1) ? 1 : 0;
    }
    const double w = static_cast<double>(monitor.window);
    const double expected_accidentals = (n0 / w) * (n1 / w) * w;
    return static_cast<double>(doubles) >
                   monitor.accidental_threshold_factor * expected_accidentals
               ? MonitorVerdict::Alarm
               : MonitorVerdict::Pass;
}

double expected_click_prob_two_detectors(const PhotonSource& src,
                                         double channel_transmittance,
                                         const Detector& det) {
    if (!(channel_transmittance >= 0.0 && channel_transmittance <= 1.0)) {
        throw std::invalid_argument(
            "expected_click_prob_two_detectors: transmittance must lie in [0, 1]");
    }
    // P(no photon click) = E[(1 - eta*t)^n]; either of the two gates can
    // still fire from a dark count.
    const double no_photon = photon_number_pgf(src, 1.0 - det.efficiency * channel_transmittance);
    const double no_dark = (1.0 - det.dark_prob) * (1.0 - det.dark_prob);
    return 1.0 - no_photon * no_dark;
}

}  // namespace qkd
