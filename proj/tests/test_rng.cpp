#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "snakesim/rng.hpp"
#include "snakesim/stats.hpp"

using namespace snakesim;

TEST_CASE("identical seed and stream give identical output") {
    Rng a(123, 4), b(123, 4);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng c(123, 5);
    bool all_equal = true;
    Rng a2(123, 4);
    for (int i = 0; i < 100; ++i) all_equal = all_equal && (a2.next_u64() == c.next_u64());
    CHECK_FALSE(all_equal);
}

TEST_CASE("uniforms live in the half-open unit interval") {
    Rng rng(7, 0);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("gaussian moments") {
    Rng rng(11, 0);
    const int n = 200000;
    double s1 = 0.0, s2 = 0.0, s4 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double g = rng.gaussian();
        s1 += g;
        s2 += g * g;
        s4 += g * g * g * g;
    }
    CHECK(std::abs(s1 / n) < 0.01);
    CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.02));
    CHECK(s4 / n == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("one-sided stable variates match the Laplace transform") {
    // E[exp(-lambda X)] = exp(|sec(3 pi/4)| lambda^{3/2}) = exp(sqrt(2) lambda^{3/2})
    Rng rng(13, 0);
    const int n = 400000;
    double acc_half = 0.0, acc_one = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.stable_one_sided(1.5);
        acc_half += std::exp(-0.5 * x);
        acc_one += std::exp(-1.0 * x);
    }
    CHECK(acc_half / n ==
          doctest::Approx(std::exp(std::sqrt(2.0) * std::pow(0.5, 1.5))).epsilon(0.02));
    CHECK(acc_one / n == doctest::Approx(std::exp(std::sqrt(2.0))).epsilon(0.03));
}

TEST_CASE("below is uniform over its range") {
    Rng rng(17, 0);
    std::vector<int> counts(7, 0);
    const int n = 70000;
    for (int i = 0; i < n; ++i) ++counts[rng.below(7)];
    for (int c : counts) CHECK(std::abs(c - n / 7) < 5 * std::sqrt(n / 7.0));
}
