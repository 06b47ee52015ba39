#pragma once

#include <cmath>
#include <cstdint>

namespace flextclus {

// Minimal PCG32 (XSH-RR).  Chosen over engines from <random> because its
// output sequence is fixed by the algorithm, not by the standard library
// implementation, so generated datasets are identical on every platform.
struct Pcg32 {
    std::uint64_t state = 0;
    std::uint64_t inc = 1;  // must stay odd

    static Pcg32 seeded(std::uint64_t initstate, std::uint64_t initseq) {
        Pcg32 g;
        g.state = 0;
        g.inc = (initseq << 1u) | 1u;
        g.next_u32();
        g.state += initstate;
        g.next_u32();
        return g;
    }

    std::uint32_t next_u32() {
        const std::uint64_t old = state;
        state = old * 6364136223846793005ULL + inc;
        const auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
        const auto rot = static_cast<std::uint32_t>(old >> 59u);
        return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
    }

    // 53-bit uniform in [0, 1)
    double uniform01() {
        const std::uint64_t hi = next_u32() >> 6;  // 26 bits
        const std::uint64_t lo = next_u32() >> 5;  // 27 bits
        return static_cast<double>((hi << 27) | lo) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    // unbiased integer in [0, bound) by rejection
    std::uint32_t bounded(std::uint32_t bound) {
        const std::uint32_t threshold = (0u - bound) % bound;
        for (;;) {
            const std::uint32_t r = next_u32();
            if (r >= threshold) return r % bound;
        }
    }
};

inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// One generator per (seed, purpose, index).  The key is mixed through
// splitmix64 between components, so streams for different purposes or
// indices never overlap and can be drawn in any order.
inline Pcg32 make_stream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index) {
    std::uint64_t x = seed;
    x = splitmix64(x) ^ (0x632BE59BD9B4E019ULL * (purpose + 1));
    x = splitmix64(x) ^ (0x9E6C63D0876A9A35ULL * (index + 1));
    const std::uint64_t s0 = splitmix64(x);
    const std::uint64_t s1 = splitmix64(x);
    return Pcg32::seeded(s0, s1);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t purpose,
                                 std::uint64_t index) {
    std::uint64_t x = seed;
    x = splitmix64(x) ^ (0x632BE59BD9B4E019ULL * (purpose + 1));
    x = splitmix64(x) ^ (0x9E6C63D0876A9A35ULL * (index + 1));
    return splitmix64(x);
}

// Marsaglia polar method with one cached deviate; fixed algorithm for the
// same cross-platform reproducibility reason as Pcg32.
struct GaussianStream {
    Pcg32 rng;
    bool has_spare = false;
    double spare = 0.0;

    explicit GaussianStream(Pcg32 g) : rng(g) {}

    double next() {
        if (has_spare) {
            has_spare = false;
            return spare;
        }
        double x, y, s;
        do {
            x = 2.0 * rng.uniform01() - 1.0;
            y = 2.0 * rng.uniform01() - 1.0;
            s = x * x + y * y;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare = y * f;
        has_spare = true;
        return x * f;
    }
};

}  // namespace flextclus
