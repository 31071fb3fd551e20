#pragma once

#include <cstdint>
#include <random>

namespace sea {

// Converts 64 random bits to a double in [0, 1). Used instead of
// std::uniform_real_distribution, whose output is implementation-defined;
// this keeps seeded runs reproducible across standard libraries.
inline double u01_from_bits(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Sequential seeded generator for dataset synthesis, init and shuffling.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    double u01() { return u01_from_bits(next()); }

    // Uniform integer in [0, n) via 128-bit multiply (no modulo bias worth
    // caring about at these sizes, and fully deterministic).
    std::uint64_t bounded(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

private:
    std::mt19937_64 eng_;
};

// Counter-based stream for per-node decisions: the draw depends only on the
// key tuple, never on evaluation order, so parallel and sequential execution
// agree.
inline std::uint64_t counter_bits(std::uint64_t seed, std::uint64_t a,
                                  std::uint64_t b, std::uint64_t c) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ b);
    h = splitmix64(h ^ c);
    return h;
}

inline double counter_u01(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c) {
    return u01_from_bits(counter_bits(seed, a, b, c));
}

}  // namespace sea
