#pragma once

#include <array>
#include <complex>

#include "qkd/random.hpp"

namespace qkd {

using Complex = std::complex<double>;

// The two conjugate preparation/measurement bases used by both protocols:
// the +/-x and +/-y axes of the Bloch equator. Any eigenstate of one basis
// has overlap magnitude 1/sqrt(2) with every eigenstate of the other.
// Outcome (and key bit) 0 maps to the + eigenstate, 1 to the - eigenstate.
enum class Basis : int { X = 0, Y = 1 };

const char* to_string(Basis b);
Basis other_basis(Basis b);

// Single-qubit pure state amp0|0> + amp1|1>. Construction enforces unit norm
// to within 1e-12; the unchecked factory exists for error-path tests and
// external amplitude data only.
class QubitState {
public:
    QubitState(Complex amp0, Complex amp1);

    // Rescales arbitrary (non-null) amplitudes to unit norm.
    static QubitState normalized(Complex amp0, Complex amp1);

    // No validation; may construct a non-normalized state.
    static QubitState raw(Complex amp0, Complex amp1);

    Complex amp0() const { return amp0_; }
    Complex amp1() const { return amp1_; }

    double norm() const;
    bool is_normalized(double tol = 1e-12) const;

private:
    QubitState() = default;

    Complex amp0_;
    Complex amp1_;
};

// <a|b>
Complex inner(const QubitState& a, const QubitState& b);

// Eigenstate of `basis` with outcome index 0 (+) or 1 (-).
QubitState eigenstate(Basis basis, int outcome);

// State Alice prepares for a key bit in a basis (bit 0 -> +, 1 -> -).
QubitState prepare_state(int bit, Basis basis);

// P(outcome | measure `state` in `basis`) via the Born rule.
double born_probability(const QubitState& state, Basis basis, int outcome);

// Projective measurement; draws the outcome from the Born distribution.
// Rejects states whose norm has drifted away from 1.
int measure(const QubitState& state, Basis basis, RandomStream& rng);

// 2x2 complex matrix, row-major {m00, m01, m10, m11}.
class Unitary2 {
public:
    Unitary2(Complex m00, Complex m01, Complex m10, Complex m11);

    static Unitary2 identity();
    // diag(1, e^{i phi})
    static Unitary2 diag_phase(double phi);
    // Haar-distributed random unitary.
    static Unitary2 haar_random(RandomStream& rng);

    Complex at(int row, int col) const { return m_[2 * row + col]; }
    Unitary2 transpose() const;
    bool is_unitary(double tol = 1e-10) const;

    QubitState apply(const QubitState& s) const;

private:
    std::array<Complex, 4> m_;
};

// Two-qubit pure state; amplitude index is 2*a + b for |a>|b>.
class TwoQubitState {
public:
    // (|00> + |11>) / sqrt(2)
    static TwoQubitState phi_plus();

    Complex amp(int index) const { return amps_[index]; }
    double norm() const;

    TwoQubitState apply_left(const Unitary2& u) const;   // U (x) 1
    TwoQubitState apply_right(const Unitary2& u) const;  // 1 (x) U

private:
    TwoQubitState() = default;

    std::array<Complex, 4> amps_{};
};

// Euclidean norm of (U (x) 1)|phi+> - (1 (x) U^T)|phi+>. Zero in exact
// arithmetic for every unitary U; the residual bounds the numerical noise of
// the propagation machinery. Rejects non-unitary input.
double transpose_identity_residual(const Unitary2& u);

// Binary entropy in bits, h(0) = h(1) = 0 by continuity. Rejects p outside
// [0, 1].
double binary_entropy(double p);

// Mutual information of a binary symmetric channel with crossover q:
// 1 - h(q). Rejects q outside [0, 1/2] (sifted-key error rates only).
double mutual_information_bsc(double q);

}  // namespace qkd
