#include "snakesim/rng.hpp"

#include <numbers>

namespace snakesim {

namespace {
std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace

void Rng::reseed(std::uint64_t seed, std::uint64_t stream) {
    // Mix the stream id through a distinct splitmix chain so that nearby
    // stream ids land in unrelated regions of state space.
    std::uint64_t a = seed;
    std::uint64_t b = stream ^ 0x6a09e667f3bcc909ULL;
    std::uint64_t c = splitmix64(b);
    std::uint64_t x = seed ^ (c * 0x9e3779b97f4a7c15ULL);
    for (int i = 0; i < 4; ++i) s_[i] = splitmix64(x);
    (void)a;
    // xoshiro must not start from the all-zero state
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
    has_cached_gauss_ = false;
    // warm-up round flushes low-entropy seeds
    for (int i = 0; i < 8; ++i) next_u64();
}

std::uint64_t Rng::below(std::uint64_t n) {
    // rejection against the last partial block keeps the draw exactly uniform
    const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
    std::uint64_t v;
    do { v = next_u64(); } while (v >= limit);
    return v % n;
}

double Rng::gaussian() {
    if (has_cached_gauss_) {
        has_cached_gauss_ = false;
        return cached_gauss_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    cached_gauss_ = v * m;
    has_cached_gauss_ = true;
    return u * m;
}

double Rng::stable_one_sided(double alpha) {
    // Chambers-Mallows-Stuck with beta = +1 (all jumps positive).  For
    // alpha in (1,2) the S1 variate has mean zero and Laplace transform
    // E[exp(-lambda X)] = exp(|sec(pi alpha/2)| lambda^alpha), lambda >= 0.
    const double half_pi = std::numbers::pi / 2.0;
    const double theta0 = std::atan(std::tan(half_pi * alpha)) / alpha;  // < 0 for alpha in (1,2)
    const double s_ab = std::pow(1.0 + std::tan(half_pi * alpha) * std::tan(half_pi * alpha),
                                 1.0 / (2.0 * alpha));
    const double u = (uniform_pos() - 0.5) * std::numbers::pi;  // uniform on (-pi/2, pi/2)
    const double e = exponential();
    const double num = std::sin(alpha * (u + theta0));
    const double den = std::pow(std::cos(u), 1.0 / alpha);
    const double tail = std::pow(std::cos(u - alpha * (u + theta0)) / e, (1.0 - alpha) / alpha);
    return s_ab * (num / den) * tail;
}

}  // namespace snakesim
