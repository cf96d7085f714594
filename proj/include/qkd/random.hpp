#pragma once

#include <cstdint>

namespace qkd {

// Deterministic counter-based random stream.
//
// A stream is a (key, counter) pair. Every draw hashes the current counter
// under the key with a fixed 64-bit finalizer, so the sequence produced by a
// given seed is identical on every platform and independent of how many draws
// other streams have consumed. Substreams derive fresh keys from (key, index)
// and can be handed out per pulse / per stage without any shared state; two
// children of the same parent never collide.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed);

    // Next raw 64-bit word.
    std::uint64_t next_u64();

    // Uniform double in [0, 1), 53 mantissa bits.
    double next_double();

    // True with probability p (p <= 0 never, p >= 1 always).
    bool bernoulli(double p);

    // Uniform bit in {0, 1}.
    int uniform_bit();

    // Unbiased uniform integer in [0, n); n must be >= 1.
    std::uint64_t uniform_below(std::uint64_t n);

    // Poisson-distributed count with mean mu >= 0 (Knuth's product method;
    // intended for the moderate means used by photon sources).
    int poisson(double mu);

    // Independent substream addressed by index; deterministic in
    // (this stream's key, index) and unaffected by draws made here.
    RandomStream child(std::uint64_t index) const;

    std::uint64_t key() const { return key_; }

    // Build a stream directly from a derived key (sweep seeding).
    static RandomStream from_key(std::uint64_t key);

    // The 64-bit finalizer used throughout (splitmix64 finalization step).
    static std::uint64_t mix64(std::uint64_t z);

private:
    RandomStream() = default;

    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

}  // namespace qkd
