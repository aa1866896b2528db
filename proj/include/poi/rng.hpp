#pragma once

#include <cstdint>

namespace poi {

/// SplitMix64 generator (Steele, Lea, Flood 2014). Chosen over std engines
/// because its output sequence is fully pinned by the algorithm, so a given
/// seed reproduces bit-for-bit on every platform and standard library.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform integer in [0, bound), unbiased via rejection sampling.
    std::uint64_t next_below(std::uint64_t bound) {
        // Reject the tail that would skew the modulo.
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound + 1) % bound;
        std::uint64_t v;
        do {
            v = next();
        } while (v > limit);
        return v % bound;
    }

    /// Uniform double in [0, 1), 53 bits of randomness.
    double next_double() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

}  // namespace poi
