#pragma once

#include <cmath>
#include <cstdint>

namespace snakesim {

/// Counter-free xoshiro256++ generator with explicit (seed, stream) addressing.
/// Identical (seed, stream) pairs produce identical byte streams on every
/// platform; nothing from <random> is used because libstdc++/libc++ disagree
/// on distribution algorithms.
class Rng {
public:
    Rng() : Rng(0, 0) {}
    Rng(std::uint64_t seed, std::uint64_t stream) { reseed(seed, stream); }

    void reseed(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64() {
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

    /// Uniform on [0,1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on (0,1); never returns 0.
    double uniform_pos() {
        double u;
        do { u = uniform(); } while (u == 0.0);
        return u;
    }

    /// Fair coin as +1 / -1.
    int sign() { return (next_u64() >> 63) ? 1 : -1; }

    /// Integer uniform on [0, n).
    std::uint64_t below(std::uint64_t n);

    /// Standard normal via the Marsaglia polar method (pair cached).
    double gaussian();

    /// Exponential(1).
    double exponential() { return -std::log(uniform_pos()); }

    /// Standard one-sided-skew stable variate, index alpha in (1,2), skew +1,
    /// scale 1, zero mean (Chambers-Mallows-Stuck, S1 parameterization).
    double stable_one_sided(double alpha);

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4];
    double cached_gauss_ = 0.0;
    bool has_cached_gauss_ = false;
};

}  // namespace snakesim
