#include "qkd/random.hpp"

#include <cmath>
#include <stdexcept>

namespace qkd {

namespace {
// Domain-separation salts: seeding, per-draw hashing and child derivation
// must never alias each other.
constexpr std::uint64_t kSeedSalt = 0x8BADF00D5EEDC0DEull;
constexpr std::uint64_t kChildSalt = 0xC2B2AE3D27D4EB4Full;
}  // namespace

std::uint64_t RandomStream::mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

RandomStream::RandomStream(std::uint64_t seed) : key_(mix64(seed ^ kSeedSalt)) {}

RandomStream RandomStream::from_key(std::uint64_t key) {
    RandomStream s;
    s.key_ = key;
    return s;
}

std::uint64_t RandomStream::next_u64() {
    return mix64(key_ ^ mix64(counter_++));
}

double RandomStream::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

bool RandomStream::bernoulli(double p) {
    return next_double() < p;
}

int RandomStream::uniform_bit() {
    return static_cast<int>(next_u64() & 1u);
}

std::uint64_t RandomStream::uniform_below(std::uint64_t n) {
    if (n == 0) {
        throw std::invalid_argument("uniform_below: n must be >= 1");
    }
    // Rejection below the largest multiple of n keeps the draw unbiased.
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        const std::uint64_t r = next_u64();
        if (r >= threshold) {
            return r % n;
        }
    }
}

int RandomStream::poisson(double mu) {
    if (!(mu >= 0.0)) {
        throw std::invalid_argument("poisson: mu must be >= 0");
    }
    const double limit = std::exp(-mu);
    double product = 1.0;
    int count = -1;
    do {
        ++count;
        product *= next_double();
    } while (product > limit);
    return count;
}

RandomStream RandomStream::child(std::uint64_t index) const {
    return from_key(mix64(key_ ^ mix64(index ^ kChildSalt)));
}

}  // namespace qkd
