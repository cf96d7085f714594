#include "qkd/optics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qkd {

namespace {
constexpr Complex kI{0.0, 1.0};
}

Visibility::Visibility(double v) : v_(v) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument("Visibility: value must lie in [0, 1]");
    }
}

Interferometer::Interferometer(double phase_, int delay_, double input_coupling_,
                               double output_coupling_)
    : phase(phase_), delay(delay_), input_coupling(input_coupling_),
      output_coupling(output_coupling_) {
    if (delay < 1) {
        throw std::invalid_argument("Interferometer: delay must be >= 1 time bin");
    }
    if (!(input_coupling >= 0.0 && input_coupling <= 1.0) ||
        !(output_coupling >= 0.0 && output_coupling <= 1.0)) {
        throw std::invalid_argument("Interferometer: couplings must lie in [0, 1]");
    }
}

TimeBinAmplitudes::TimeBinAmplitudes(int num_bins) {
    if (num_bins < 0) {
        throw std::invalid_argument("TimeBinAmplitudes: negative bin count");
    }
    port_[0].assign(num_bins, Complex{});
    port_[1].assign(num_bins, Complex{});
}

TimeBinAmplitudes TimeBinAmplitudes::single_pulse(int port, int bin) {
    TimeBinAmplitudes t(bin + 1);
    t.set(port, bin, 1.0);
    return t;
}

Complex TimeBinAmplitudes::at(int port, int bin) const {
    if (port != 0 && port != 1) {
        throw std::out_of_range("TimeBinAmplitudes: port must be 0 or 1");
    }
    if (bin < 0 || bin >= num_bins()) {
        return Complex{};
    }
    return port_[port][bin];
}

void TimeBinAmplitudes::set(int port, int bin, Complex a) {
    if (port != 0 && port != 1) {
        throw std::out_of_range("TimeBinAmplitudes: port must be 0 or 1");
    }
    if (bin < 0) {
        throw std::out_of_range("TimeBinAmplitudes: negative bin");
    }
    if (bin >= num_bins()) {
        port_[0].resize(bin + 1, Complex{});
        port_[1].resize(bin + 1, Complex{});
    }
    port_[port][bin] = a;
}

void TimeBinAmplitudes::add(int port, int bin, Complex a) {
    set(port, bin, at(port, bin) + a);
}

double TimeBinAmplitudes::total_probability() const {
    double p = 0.0;
    for (const auto& bins : port_) {
        for (const Complex& a : bins) {
            p += std::norm(a);
        }
    }
    return p;
}

TimeBinAmplitudes TimeBinAmplitudes::selected_port(int port) const {
    if (port != 0 && port != 1) {
        throw std::out_of_range("TimeBinAmplitudes: port must be 0 or 1");
    }
    TimeBinAmplitudes out(num_bins());
    out.port_[0] = port_[port];
    return out;
}

TimeBinAmplitudes propagate(const TimeBinAmplitudes& input, const Interferometer& dev) {
    const double t_in = std::sqrt(1.0 - dev.input_coupling);
    const double r_in = std::sqrt(dev.input_coupling);
    const double t_out = std::sqrt(1.0 - dev.output_coupling);
    const double r_out = std::sqrt(dev.output_coupling);
    const Complex long_phase = std::polar(1.0, dev.phase);

    TimeBinAmplitudes out(input.num_bins() + dev.delay);
    for (int bin = 0; bin < input.num_bins(); ++bin) {
        const Complex a = input.at(0, bin);
        const Complex b = input.at(1, bin);
        if (a == Complex{} && b == Complex{}) {
            continue;
        }
        // Entry coupler: through amplitude sqrt(1-c), cross amplitude
        // i sqrt(c) (lossless beam-splitter convention).
        const Complex short_arm = t_in * a + kI * r_in * b;
        const Complex long_arm = (kI * r_in * a + t_in * b) * long_phase;
        out.add(0, bin, t_out * short_arm);
        out.add(1, bin, kI * r_out * short_arm);
        out.add(0, bin + dev.delay, kI * r_out * long_arm);
        out.add(1, bin + dev.delay, t_out * long_arm);
    }
    return out;
}

CoincidenceDistribution::CoincidenceDistribution(
    const std::array<std::array<double, 4>, 3>& probs)
    : p_(probs) {
    double total = 0.0;
    for (const auto& row : p_) {
        for (double v : row) {
            if (v < 0.0) {
                throw std::invalid_argument("CoincidenceDistribution: negative probability");
            }
            total += v;
        }
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw std::invalid_argument("CoincidenceDistribution: probabilities must sum to 1");
    }
}

double CoincidenceDistribution::prob(Peak peak, int det_a, int det_b) const {
    if ((det_a != 0 && det_a != 1) || (det_b != 0 && det_b != 1)) {
        throw std::out_of_range("CoincidenceDistribution: detector index must be 0 or 1");
    }
    return p_[static_cast<int>(peak)][2 * det_a + det_b];
}

double CoincidenceDistribution::peak_prob(Peak peak) const {
    const auto& row = p_[static_cast<int>(peak)];
    return row[0] + row[1] + row[2] + row[3];
}

CoincidenceDistribution franson_coincidence(double phase_a, double phase_b, Visibility v) {
    const double c = v.value() * std::cos(phase_a + phase_b);
    const double same = (1.0 + c) / 8.0;  // each of (0,0) and (1,1)
    const double diff = (1.0 - c) / 8.0;  // each of (0,1) and (1,0)
    const std::array<double, 4> lateral{0.0625, 0.0625, 0.0625, 0.0625};
    return CoincidenceDistribution({lateral,
                                    std::array<double, 4>{same, diff, diff, same},
                                    lateral});
}

std::array<double, 2> plug_and_play_click_prob(double phase_bob, double phase_alice,
                                               Visibility v) {
    const double p0 = (1.0 + v.value() * std::cos(phase_bob - phase_alice)) / 2.0;
    return {p0, 1.0 - p0};
}

double qber_from_visibility(Visibility v) {
    return (1.0 - v.value()) / 2.0;
}

double chsh_value(Visibility v) {
    return 2.0 * std::numbers::sqrt2 * v.value();
}

}  // namespace qkd
