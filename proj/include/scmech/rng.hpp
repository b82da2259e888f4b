#pragma once

#include <cstdint>

namespace scmech {

/// splitmix64 step; used for seeding and for deriving per-shard substreams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// xoshiro256++ with portable double generation; bitwise reproducible across
/// platforms for a given seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : s_) word = splitmix64(sm);
    }

    /// Substream `stream` of a master seed; streams are independent for
    /// distinct indices.
    static Rng substream(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t sm = seed;
        const std::uint64_t a = splitmix64(sm);
        std::uint64_t sm2 = a ^ (0x9E3779B97F4A7C15ull * (stream + 1));
        return Rng(splitmix64(sm2));
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1).
    double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return next() % n; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

/// Van der Corput radical inverse in the given base.
inline double radical_inverse(std::uint64_t i, std::uint64_t base) {
    double inv = 1.0 / static_cast<double>(base);
    double f = inv;
    double x = 0.0;
    while (i > 0) {
        x += static_cast<double>(i % base) * f;
        i /= base;
        f *= inv;
    }
    return x;
}

/// Halton point: deterministic low-discrepancy sequence used for stratified
/// multi-start seeding. `dim` indexes the prime base.
inline double halton(std::uint64_t i, std::size_t dim) {
    static constexpr std::uint64_t primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                                               31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
    return radical_inverse(i + 1, primes[dim % (sizeof(primes) / sizeof(primes[0]))]);
}

}  // namespace scmech
