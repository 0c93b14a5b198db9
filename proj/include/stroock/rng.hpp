#pragma once

#include <cmath>
#include <cstdint>

#include "stroock/errors.hpp"

namespace stroock {

// Identifies one reproducible random substream. Identical (seed, stream)
// pairs reproduce identical draws bit-for-bit on every platform.
struct RngSeed {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    RngSeed with_stream(std::uint64_t s) const { return RngSeed{seed, s}; }
};

namespace detail {

// SplitMix64 finalizer (Steele/Lea/Flood).
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace detail

// Counter-based generator: output k is a pure function of (seed, stream, k),
// so substreams are splittable and draws are replayable from the counter.
class CounterRng {
public:
    explicit CounterRng(RngSeed s)
        : key_(detail::mix64(s.seed) ^ detail::mix64(detail::mix64(s.stream) + 0x6A09E667F3BCC909ULL)) {}

    std::uint64_t next_u64() { return detail::mix64(key_ + counter_++ * 0x9E3779B97F4A7C15ULL); }

    // Uniform on the open interval (0, 1).
    double next_unit() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double next_exponential(double rate) {
        if (!(rate > 0.0)) throw domain_error("next_exponential: rate must be positive");
        return -std::log(next_unit()) / rate;
    }

    // Fair coin: +1 or -1.
    int next_sign() { return (next_u64() & 1u) ? +1 : -1; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace stroock
