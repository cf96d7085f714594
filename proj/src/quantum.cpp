#include "qkd/quantum.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qkd {

namespace {
constexpr double kInvSqrt2 = std::numbers::sqrt2 / 2.0;
constexpr Complex kI{0.0, 1.0};
}  // namespace

const char* to_string(Basis b) {
    return b == Basis::X ? "X" : "Y";
}

Basis other_basis(Basis b) {
    return b == Basis::X ? Basis::Y : Basis::X;
}

QubitState::QubitState(Complex amp0, Complex amp1) : amp0_(amp0), amp1_(amp1) {
    if (std::abs(norm() - 1.0) > 1e-12) {
        throw std::invalid_argument("QubitState: amplitudes must have unit norm");
    }
}

QubitState QubitState::normalized(Complex amp0, Complex amp1) {
    const double n = std::sqrt(std::norm(amp0) + std::norm(amp1));
    if (n == 0.0) {
        throw std::invalid_argument("QubitState: cannot normalize the null vector");
    }
    QubitState s;
    s.amp0_ = amp0 / n;
    s.amp1_ = amp1 / n;
    return s;
}

QubitState QubitState::raw(Complex amp0, Complex amp1) {
    QubitState s;
    s.amp0_ = amp0;
    s.amp1_ = amp1;
    return s;
}

double QubitState::norm() const {
    return std::sqrt(std::norm(amp0_) + std::norm(amp1_));
}

bool QubitState::is_normalized(double tol) const {
    return std::abs(norm() - 1.0) <= tol;
}

Complex inner(const QubitState& a, const QubitState& b) {
    return std::conj(a.amp0()) * b.amp0() + std::conj(a.amp1()) * b.amp1();
}

QubitState eigenstate(Basis basis, int outcome) {
    if (outcome != 0 && outcome != 1) {
        throw std::invalid_argument("eigenstate: outcome must be 0 or 1");
    }
    const double sign = outcome == 0 ? 1.0 : -1.0;
    if (basis == Basis::X) {
        return QubitState(kInvSqrt2, sign * kInvSqrt2);
    }
    return QubitState(kInvSqrt2, sign * kI * kInvSqrt2);
}

QubitState prepare_state(int bit, Basis basis) {
    return eigenstate(basis, bit);
}

double born_probability(const QubitState& state, Basis basis, int outcome) {
    return std::norm(inner(eigenstate(basis, outcome), state));
}

int measure(const QubitState& state, Basis basis, RandomStream& rng) {
    if (!state.is_normalized(1e-9)) {
        throw std::invalid_argument("measure: state is not normalized");
    }
    const double p0 = born_probability(state, basis, 0);
    return rng.next_double() < p0 ? 0 : 1;
}

Unitary2::Unitary2(Complex m00, Complex m01, Complex m10, Complex m11)
    : m_{m00, m01, m10, m11} {}

Unitary2 Unitary2::identity() {
    return Unitary2(1.0, 0.0, 0.0, 1.0);
}

Unitary2 Unitary2::diag_phase(double phi) {
    return Unitary2(1.0, 0.0, 0.0, std::polar(1.0, phi));
}

Unitary2 Unitary2::haar_random(RandomStream& rng) {
    // Standard parametrization: global phase x U(2) Euler angles, with
    // theta = asin(sqrt(u)) making the measure Haar.
    const double two_pi = 2.0 * std::numbers::pi;
    const double theta = std::asin(std::sqrt(rng.next_double()));
    const double alpha = two_pi * rng.next_double();
    const double beta = two_pi * rng.next_double();
    const double delta = two_pi * rng.next_double();
    const Complex g = std::polar(1.0, delta);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return Unitary2(g * std::polar(c, alpha), g * std::polar(s, beta),
                    -g * std::polar(s, -beta), g * std::polar(c, -alpha));
}

Unitary2 Unitary2::transpose() const {
    return Unitary2(m_[0], m_[2], m_[1], m_[3]);
}

bool Unitary2::is_unitary(double tol) const {
    // U U^dagger == 1 entrywise.
    const Complex g00 = m_[0] * std::conj(m_[0]) + m_[1] * std::conj(m_[1]);
    const Complex g01 = m_[0] * std::conj(m_[2]) + m_[1] * std::conj(m_[3]);
    const Complex g10 = m_[2] * std::conj(m_[0]) + m_[3] * std::conj(m_[1]);
    const Complex g11 = m_[2] * std::conj(m_[2]) + m_[3] * std::conj(m_[3]);
    return std::abs(g00 - 1.0) <= tol && std::abs(g01) <= tol &&
           std::abs(g10) <= tol && std::abs(g11 - 1.0) <= tol;
}

QubitState Unitary2::apply(const QubitState& s) const {
    return QubitState(m_[0] * s.amp0() + m_[1] * s.amp1(),
                      m_[2] * s.amp0() + m_[3] * s.amp1());
}

TwoQubitState TwoQubitState::phi_plus() {
    TwoQubitState s;
    s.amps_[0] = kInvSqrt2;
    s.amps_[3] = kInvSqrt2;
    return s;
}

double TwoQubitState::norm() const {
    double n = 0.0;
    for (const Complex& a : amps_) {
        n += std::norm(a);
    }
    return std::sqrt(n);
}

TwoQubitState TwoQubitState::apply_left(const Unitary2& u) const {
    TwoQubitState out;
    for (int b = 0; b < 2; ++b) {
        for (int ap = 0; ap < 2; ++ap) {
            out.amps_[2 * ap + b] =
                u.at(ap, 0) * amps_[b] + u.at(ap, 1) * amps_[2 + b];
        }
    }
    return out;
}

TwoQubitState TwoQubitState::apply_right(const Unitary2& u) const {
    TwoQubitState out;
    for (int a = 0; a < 2; ++a) {
        for (int bp = 0; bp < 2; ++bp) {
            out.amps_[2 * a + bp] =
                u.at(bp, 0) * amps_[2 * a] + u.at(bp, 1) * amps_[2 * a + 1];
        }
    }
    return out;
}

double transpose_identity_residual(const Unitary2& u) {
    if (!u.is_unitary()) {
        throw std::invalid_argument("transpose_identity_residual: input is not unitary");
    }
    const TwoQubitState phi = TwoQubitState::phi_plus();
    const TwoQubitState lhs = phi.apply_left(u);
    const TwoQubitState rhs = phi.apply_right(u.transpose());
    double s = 0.0;
    for (int k = 0; k < 4; ++k) {
        s += std::norm(lhs.amp(k) - rhs.amp(k));
    }
    return std::sqrt(s);
}

double binary_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::domain_error("binary_entropy: p must lie in [0, 1]");
    }
    if (p == 0.0 || p == 1.0) {
        return 0.0;
    }
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double mutual_information_bsc(double q) {
    if (!(q >= 0.0 && q <= 0.5)) {
        throw std::domain_error("mutual_information_bsc: q must lie in [0, 1/2]");
    }
    return 1.0 - binary_entropy(q);
}

}  // namespace qkd
