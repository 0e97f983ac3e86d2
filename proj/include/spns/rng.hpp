#pragma once

#include <cmath>
#include <cstdint>

#include "spns/grid.hpp"

namespace spns {

// Fixed xor-shift-multiply finalizer (splitmix64 style). All randomness in
// the project is derived from this one mixer so streams are reproducible
// bit-for-bit regardless of scheduling.
inline uint64_t mix64(uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

// Stateless counter-based stream: word i of stream s is mix64(s + i*phi).
// Distinct stream keys give statistically independent sequences.
class CounterRng {
public:
    explicit CounterRng(uint64_t stream_key) : key_(stream_key) {}

    uint64_t word(uint64_t counter) const {
        return mix64(key_ + counter * 0x9E3779B97F4A7C15ULL);
    }

    // Uniform in (0,1]: 53-bit mantissa, never exactly zero.
    double uniform(uint64_t counter) const {
        return (static_cast<double>(word(counter) >> 11) + 1.0) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; draw index i consumes counters 2i, 2i+1.
    double gaussian(uint64_t i) const {
        const double u1 = uniform(2 * i);
        const double u2 = uniform(2 * i + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
    }

private:
    uint64_t key_;
};

// Stream key for one (base_seed, path) pair; substreams hang off this key.
inline uint64_t path_stream_key(uint64_t base_seed, uint64_t path_index) {
    return mix64(base_seed ^ mix64(path_index));
}

inline uint64_t substream_key(uint64_t stream_key, uint64_t substream) {
    return mix64(stream_key ^ mix64(0x5851F42D4C957F2DULL + substream));
}

} // namespace spns
