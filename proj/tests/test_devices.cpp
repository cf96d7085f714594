#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "qkd/devices.hpp"

using qkd::CoincidenceMonitor;
using qkd::Detector;
using qkd::FiberChannel;
using qkd::GateClicks;
using qkd::MonitorVerdict;
using qkd::PhotonSource;
using qkd::RandomStream;
using qkd::TruncatedSource;
using qkd::WatchdogMonitor;
using qkd::WeakCoherentSource;

TEST_CASE("device constructors validate their parameters") {
    CHECK_THROWS_AS(WeakCoherentSource(-0.1), std::invalid_argument);
    CHECK_THROWS_AS(TruncatedSource(-0.1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(TruncatedSource(0.9, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(FiberChannel(-1.0, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(FiberChannel(0.25, -10.0), std::invalid_argument);
    CHECK_THROWS_AS(Detector(1.1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(Detector(0.5, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(WatchdogMonitor(1.5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(WatchdogMonitor(0.9, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(CoincidenceMonitor(0.5, 10), std::invalid_argument);
    CHECK_THROWS_AS(CoincidenceMonitor(3.0, 0), std::invalid_argument);
}

TEST_CASE("truncated source emits exactly its stated distribution") {
    const TruncatedSource src(0.6, 0.1);
    const PhotonSource ps = src;
    CHECK(qkd::photon_number_prob(ps, 0) == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(qkd::photon_number_prob(ps, 1) == doctest::Approx(0.6));
    CHECK(qkd::photon_number_prob(ps, 2) == doctest::Approx(0.1));
    CHECK(qkd::photon_number_prob(ps, 3) == 0.0);
    CHECK_THROWS_AS((void)qkd::photon_number_prob(ps, -1), std::invalid_argument);

    RandomStream rng(100);
    std::vector<int> counts(3, 0);
    const int n = 300000;
    for (int i = 0; i < n; ++i) {
        const int k = qkd::sample_photon_number(ps, rng);
        REQUIRE(k >= 0);
        REQUIRE(k <= 2);
        ++counts[static_cast<std::size_t>(k)];
    }
    CHECK(counts[0] / double(n) == doctest::Approx(0.3).epsilon(0.02));
    CHECK(counts[1] / double(n) == doctest::Approx(0.6).epsilon(0.01));
    CHECK(counts[2] / double(n) == doctest::Approx(0.1).epsilon(0.04));
}

TEST_CASE("attenuated-laser photon numbers follow the closed-form pmf") {
    const double mu = 0.1;
    const PhotonSource ps = WeakCoherentSource(mu);
    for (int k = 0; k < 5; ++k) {
        CHECK(qkd::photon_number_prob(ps, k) ==
              doctest::Approx(oracle::poisson_pmf(mu, k)).epsilon(1e-12));
    }
    CHECK(qkd::prob_single(ps) == doctest::Approx(mu * std::exp(-mu)).epsilon(1e-12));
    // multi-photon fraction at mu = 0.1: 1 - e^-mu (1 + mu) = 0.004679...
    CHECK(qkd::prob_at_least_two(ps) == doctest::Approx(0.0046788).epsilon(1e-4));

    RandomStream rng(200);
    const int n = 400000;
    std::vector<int> counts(3, 0);
    for (int i = 0; i < n; ++i) {
        const int k = qkd::sample_photon_number(ps, rng);
        if (k < 3) {
            ++counts[static_cast<std::size_t>(k)];
        }
    }
    for (int k = 0; k < 3; ++k) {
        const double p = oracle::poisson_pmf(mu, k);
        const double sigma = std::sqrt(p * (1.0 - p) / n);
        CHECK(std::abs(counts[static_cast<std::size_t>(k)] / double(n) - p) <
              4.0 * sigma + 1e-9);
    }
}

TEST_CASE("probability generating function identities") {
    const PhotonSource wcs = WeakCoherentSource(0.3);
    CHECK(qkd::photon_number_pgf(wcs, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(qkd::photon_number_pgf(wcs, 0.0) ==
          doctest::Approx(std::exp(-0.3)).epsilon(1e-14));
    // E[x^n] for Poisson is exp(-mu (1 - x))
    CHECK(qkd::photon_number_pgf(wcs, 0.4) ==
          doctest::Approx(std::exp(-0.3 * 0.6)).epsilon(1e-14));
    CHECK_THROWS_AS((void)qkd::photon_number_pgf(wcs, 1.2), std::invalid_argument);

    const PhotonSource trunc = TruncatedSource(0.6, 0.1);
    CHECK(qkd::photon_number_pgf(trunc, 0.5) ==
          doctest::Approx(0.3 + 0.6 * 0.5 + 0.1 * 0.25).epsilon(1e-14));
    CHECK(qkd::prob_at_least_two(trunc) == doctest::Approx(0.1));
}

TEST_CASE("fiber transmittance is dB-linear") {
    CHECK(qkd::transmittance(FiberChannel(0.25, 0.0)) == doctest::Approx(1.0));
    // 0.25 dB/km x 40 km = 10 dB = factor 10
    CHECK(qkd::transmittance(FiberChannel(0.25, 40.0)) ==
          doctest::Approx(0.1).epsilon(1e-12));
    // halving the length takes the square root
    const double t50 = qkd::transmittance(FiberChannel(0.25, 20.0));
    CHECK(t50 * t50 == doctest::Approx(0.1).epsilon(1e-12));
    // the long-haul reference point: 0.25 dB/km x 67 km ~ 2.1% transmission
    CHECK(qkd::transmittance(FiberChannel(0.25, 67.0)) ==
          doctest::Approx(0.02113).epsilon(1e-3));
}

TEST_CASE("click probability combines photon and dark contributions") {
    const Detector det(0.3, 0.01, "d0");
    CHECK(qkd::click_probability(0, det) == doctest::Approx(0.01).epsilon(1e-14));
    CHECK(qkd::click_probability(1, det) ==
          doctest::Approx(1.0 - 0.7 * 0.99).epsilon(1e-14));
    CHECK(qkd::click_probability(3, det) ==
          doctest::Approx(1.0 - std::pow(0.7, 3) * 0.99).epsilon(1e-14));
    CHECK_THROWS_AS((void)qkd::click_probability(-1, det), std::invalid_argument);

    const Detector perfect(1.0, 0.0);
    CHECK(qkd::click_probability(0, perfect) == 0.0);
    CHECK(qkd::click_probability(1, perfect) == 1.0);
}

TEST_CASE("detect consumes exactly two draws regardless of outcome") {
    // run gates with different photon numbers off one stream, then check the
    // stream position by comparing against a twin that skipped 2 draws per
    // gate by hand
    const Detector det(0.4, 0.05);
    RandomStream a(4242);
    RandomStream b(4242);
    for (int photons : {0, 1, 5, 0, 2}) {
        (void)qkd::detect(photons, det, a);
        (void)b.next_u64();
        (void)b.next_u64();
    }
    CHECK(a.next_u64() == b.next_u64());

    RandomStream rng(1);
    CHECK_THROWS_AS((void)qkd::detect(-1, det, rng), std::invalid_argument);
}

TEST_CASE("detect matches click_probability empirically") {
    const Detector det(0.25, 0.02);
    RandomStream rng(303);
    for (int photons : {0, 1, 4}) {
        const int n = 200000;
        int clicks = 0;
        for (int i = 0; i < n; ++i) {
            clicks += qkd::detect(photons, det, rng) ? 1 : 0;
        }
        const double p = qkd::click_probability(photons, det);
        const double sigma = std::sqrt(p * (1.0 - p) / n);
        CAPTURE(photons);
        CHECK(std::abs(clicks / double(n) - p) < 4.0 * sigma);
    }
}

TEST_CASE("watchdog alarms strictly above its tapped-energy threshold") {
    const WatchdogMonitor monitor(0.9, 9.0);
    // tapped energy = 0.9 x pulse energy; alarm requires strictly greater
    CHECK(qkd::watchdog_check(10.0, monitor) == MonitorVerdict::Pass);
    CHECK(qkd::watchdog_check(10.0 + 1e-9, monitor) == MonitorVerdict::Alarm);
    CHECK(qkd::watchdog_check(0.0, monitor) == MonitorVerdict::Pass);
    CHECK(qkd::watchdog_check(1e6, monitor) == MonitorVerdict::Alarm);
    CHECK_THROWS_AS((void)qkd::watchdog_check(-1.0, monitor), std::invalid_argument);

    // a zero threshold alarms on any tapped energy at all
    const WatchdogMonitor strict(0.5, 0.0);
    CHECK(qkd::watchdog_check(0.0, strict) == MonitorVerdict::Pass);
    CHECK(qkd::watchdog_check(1e-12, strict) == MonitorVerdict::Alarm);
}

TEST_CASE("coincidence monitor compares doubles against accidental expectation") {
    // window of 100 gates with 10 clicks on each detector: expected
    // accidentals = 0.1 * 0.1 * 100 = 1; factor 3 alarms strictly above 3
    auto make_log = [](std::size_t window, std::size_t singles0, std::size_t singles1,
                       std::size_t doubles) {
        std::vector<GateClicks> log(window);
        std::size_t g = 0;
        for (std::size_t i = 0; i < doubles; ++i, ++g) {
            log[g] = {true, true};
        }
        for (std::size_t i = 0; i < singles0; ++i, ++g) {
            log[g] = {true, false};
        }
        for (std::size_t i = 0; i < singles1; ++i, ++g) {
            log[g] = {false, true};
        }
        return log;
    };

    const CoincidenceMonitor monitor(3.0, 100);
    // 10 clicks each side, 3 doubles: 3 > 3 is false -> pass
    CHECK(qkd::coincidence_check(make_log(100, 7, 7, 3), monitor) ==
          MonitorVerdict::Pass);
    // 4 doubles push the per-detector rates to 0.11: expectation 1.21,
    // threshold 3.63, and 4 > 3.63 -> alarm
    CHECK(qkd::coincidence_check(make_log(100, 7, 7, 4), monitor) ==
          MonitorVerdict::Alarm);
    CHECK(qkd::coincidence_check(make_log(100, 0, 0, 4), monitor) ==
          MonitorVerdict::Alarm);
    // no clicks at all: expectation 0, doubles 0, no alarm
    CHECK(qkd::coincidence_check(make_log(100, 0, 0, 0), monitor) ==
          MonitorVerdict::Pass);

    CHECK_THROWS_AS(
        (void)qkd::coincidence_check(make_log(99, 0, 0, 0), monitor),
        std::invalid_argument);
}

TEST_CASE("coincidence monitor only sees the trailing window") {
    // early gates carry correlated doubles (20 doubles against ~3 expected
    // accidentals); the trailing 100 gates are clean
    std::vector<GateClicks> log(1000);
    std::size_t g = 0;
    for (std::size_t i = 0; i < 20; ++i, ++g) {
        log[g] = {true, true};
    }
    for (std::size_t i = 0; i < 30; ++i, ++g) {
        log[g] = {true, false};
        log[g + 1] = {false, true};
        ++g;
    }
    for (std::size_t i = 900; i < 1000; ++i) {
        log[i] = {i % 20 == 0, i % 20 == 10};
    }
    const CoincidenceMonitor monitor(3.0, 100);
    CHECK(qkd::coincidence_check(log, monitor) == MonitorVerdict::Pass);
    // widening the window to the whole log picks the doubles back up
    const CoincidenceMonitor wide(3.0, 1000);
    CHECK(qkd::coincidence_check(log, wide) == MonitorVerdict::Alarm);
}

TEST_CASE("expected click probability matches a direct monte carlo") {
    const PhotonSource src = WeakCoherentSource(0.2);
    const Detector det(0.4, 0.001);
    const double t = 0.3;
    const double predicted = qkd::expected_click_prob_two_detectors(src, t, det);

    // direct simulation of the honest pipeline: thin by t, split 50/50,
    // gate both detectors
    RandomStream rng(606);
    const int n = 400000;
    int fired = 0;
    for (int i = 0; i < n; ++i) {
        const int emitted = qkd::sample_photon_number(src, rng);
        int port0 = 0;
        int port1 = 0;
        for (int k = 0; k < emitted; ++k) {
            if (rng.bernoulli(t)) {
                (rng.uniform_bit() ? port1 : port0) += 1;
            }
        }
        const bool c0 = qkd::detect(port0, det, rng);
        const bool c1 = qkd::detect(port1, det, rng);
        fired += (c0 || c1) ? 1 : 0;
    }
    const double sigma = std::sqrt(predicted * (1.0 - predicted) / n);
    CHECK(std::abs(fired / double(n) - predicted) < 4.0 * sigma);

    CHECK_THROWS_AS(
        (void)qkd::expected_click_prob_two_detectors(src, 1.2, det),
        std::invalid_argument);
}
