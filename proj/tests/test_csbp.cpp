#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "snakesim/csbp.hpp"
#include "snakesim/rng.hpp"
#include "snakesim/stats.hpp"

using namespace snakesim;

TEST_CASE("transition Laplace exponent evaluates the closed form") {
    // t -> 0 recovers lambda
    CHECK(csbp_transition_laplace(0.8, 1e-9) == doctest::Approx(0.8).epsilon(1e-4));
    // lambda -> infinity saturates at 3 / (2 t^2)
    CHECK(csbp_transition_laplace(1e12, 2.0) == doctest::Approx(3.0 / 8.0).epsilon(1e-4));
    // hand value: lambda = 3/2, t = 1: (sqrt(2/3) + sqrt(2/3))^{-2} = 3/8
    CHECK(csbp_transition_laplace(1.5, 1.0) == doctest::Approx(0.375).epsilon(1e-12));
    CHECK_THROWS_AS(csbp_transition_laplace(-1.0, 1.0), std::invalid_argument);
}

TEST_CASE("stable increments are centered with the right Laplace transform") {
    Rng rng(71, 0);
    const double dtau = 0.01;
    const std::size_t n_paths = 30000;
    double sum_u1 = 0.0;
    std::vector<double> laplace_05(n_paths), laplace_1(n_paths);
    for (std::size_t p = 0; p < n_paths; ++p) {
        const LevyPath path = sample_levy(1.0, dtau, rng);
        const double u1 = path.values.back();
        sum_u1 += u1;
        laplace_05[p] = std::exp(-0.5 * u1);
        laplace_1[p] = std::exp(-1.0 * u1);
    }
    // centered: |mean| below 3 standard errors of a wide proxy
    CHECK(std::abs(sum_u1 / static_cast<double>(n_paths)) < 0.1);
    CHECK(mean_of(laplace_05) ==
          doctest::Approx(std::exp(catalog::psi(0.5))).epsilon(0.03));
    CHECK(mean_of(laplace_1) == doctest::Approx(std::exp(catalog::psi(1.0))).epsilon(0.04));
}

TEST_CASE("positive increments have the right tail index") {
    Rng rng(73, 0);
    const double dtau = 1.0;  // unit-scale increments
    std::vector<double> increments;
    for (int i = 0; i < 200000; ++i)
        increments.push_back(levy_step_scale(dtau) * rng.stable_one_sided(1.5));
    const TailFit fit = tail_exponent_fit(increments, quantile_of(increments, 0.99));
    CHECK(fit.exponent == doctest::Approx(1.5).epsilon(0.10));
}

TEST_CASE("constant paths are fixed points of both time changes") {
    LevyPath x;
    x.dtau = 0.1;
    for (int i = 0; i <= 50; ++i) {
        x.times.push_back(0.1 * i);
        x.values.push_back(2.0);
    }
    const CSBPPath z = lamperti_csbp_from_levy(x, 0.05);
    for (double v : z.values) CHECK(v == 2.0);
    CHECK(z.absorbed_at < 0.0);

    const LevyPath back = lamperti_levy_from_csbp(z, 0.1);
    for (double v : back.values) CHECK(v == 2.0);
}

TEST_CASE("round trip on a crafted piecewise-constant path is grid-exact") {
    LevyPath x;
    x.dtau = 0.01;
    const double plateaus[4] = {2.0, 3.0, 1.0, 2.5};
    for (int p = 0; p < 4; ++p) {
        for (int i = 0; i < 100; ++i) {
            x.times.push_back(x.dtau * static_cast<double>(x.values.size()));
            x.values.push_back(plateaus[p]);
        }
    }
    const CSBPPath z = lamperti_csbp_from_levy(x, 0.005);
    const LevyPath back = lamperti_levy_from_csbp(z, x.dtau);
    REQUIRE(back.values.size() >= x.values.size() - 4);
    for (std::size_t i = 0; i < std::min(back.values.size(), x.values.size()); ++i) {
        // values agree up to two grid steps of time-change drift
        double best = std::abs(back.values[i] - x.values[i]);
        for (int off = -2; off <= 2; ++off) {
            const long j = static_cast<long>(i) + off;
            if (j >= 0 && j < static_cast<long>(x.values.size()))
                best = std::min(best,
                                std::abs(back.values[i] - x.values[static_cast<std::size_t>(j)]));
        }
        REQUIRE(best == 0.0);
    }
}

TEST_CASE("jumps survive the time change with identical sizes") {
    LevyPath x;
    x.dtau = 0.01;
    double v = 1.0;
    for (int i = 0; i <= 300; ++i) {
        if (i == 100) v += 0.7;
        if (i == 200) v += 1.3;
        x.times.push_back(0.01 * i);
        x.values.push_back(v);
    }
    const CSBPPath z = lamperti_csbp_from_levy(x, 0.004);
    // collect value jumps of the transformed path
    std::vector<double> jumps;
    for (std::size_t i = 1; i < z.values.size(); ++i) {
        const double d = z.values[i] - z.values[i - 1];
        if (d > 0.1) jumps.push_back(d);
    }
    REQUIRE(jumps.size() == 2);
    CHECK(jumps[0] == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(jumps[1] == doctest::Approx(1.3).epsilon(1e-12));
}

TEST_CASE("branching property: doubled mass equals an independent sum") {
    const double dtau = 2e-3, horizon = 1.0, t_obs = 0.5;
    const std::size_t n = 3000;
    std::vector<double> doubled, summed;
    Rng rng(79, 0);
    auto z_at = [&](double z0, Rng& r) {
        const LevyPath x = sample_levy(horizon * 3.0, dtau, r, z0);
        const CSBPPath z = lamperti_csbp_from_levy(x, dtau);
        if (z.values.empty()) return 0.0;
        const auto idx = static_cast<std::size_t>(t_obs / dtau);
        if (idx >= z.values.size()) return 0.0;  // absorbed before t_obs
        return z.values[idx];
    };
    for (std::size_t i = 0; i < n; ++i) {
        doubled.push_back(z_at(2.0, rng));
        summed.push_back(z_at(1.0, rng) + z_at(1.0, rng));
    }
    const KsResult ks = ks_two_sample(doubled, summed);
    CHECK(ks.p_value > 0.01);
}

TEST_CASE("absorbed mass stays absorbed and the inverse change stops") {
    Rng rng(83, 0);
    // strongly negative start drifts to absorption quickly
    LevyPath x;
    x.dtau = 0.01;
    double v = 0.3;
    for (int i = 0; i <= 400; ++i) {
        x.times.push_back(0.01 * i);
        x.values.push_back(v);
        v -= 0.01;  // deterministic descent through 0
    }
    const CSBPPath z = lamperti_csbp_from_levy(x, 0.01);
    CHECK(z.absorbed_at >= 0.0);
    CHECK(z.values.back() == 0.0);
    for (double val : z.values) CHECK(val >= 0.0);
    const LevyPath back = lamperti_levy_from_csbp(z, 0.01);
    // defined only up to the accumulated mass of z
    double mass = 0.0;
    for (double val : z.values) mass += val * z.dr;
    CHECK(back.times.back() <= mass + 0.011);
    (void)rng;
}

TEST_CASE("snake profiles against the branching transition kernel") {
    // small synthetic check of the binned comparison plumbing: profiles with
    // z at beta and the exact conditional mean at beta + t built in
    Rng rng(89, 0);
    const double beta = 0.5, t = 0.25, lam = 1.0;
    std::vector<double> levels = {beta, beta + t};
    std::vector<ExitProfile> profiles;
    for (int i = 0; i < 4000; ++i) {
        ExitProfile p;
        p.levels = levels;
        p.eps = 0.1;
        const double z = 0.2 + rng.uniform();
        // draw the later value from a two-point law with the right transform
        const double u = catalog::u_t(lam, t);
        const double keep = std::exp(-z * u);
        p.z_hat = {z, rng.uniform() < keep ? 0.0 : 1e9};
        profiles.push_back(p);
    }
    const SnakeCsbpReport report =
        snake_vs_csbp_check(profiles, beta, {t}, {lam}, 4, 100);
    REQUIRE(!report.rows.empty());
    for (const auto& row : report.rows) {
        if (!row.sufficient) continue;
        CHECK(row.rel_err < 0.1);
    }
}
