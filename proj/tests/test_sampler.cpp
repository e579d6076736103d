#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "snakesim/exit_measure.hpp"
#include "snakesim/sampler.hpp"
#include "snakesim/stats.hpp"
#include "snakesim/transforms.hpp"

using namespace snakesim;

TEST_CASE("length-2 lifetime is the unique up-down excursion") {
    Rng rng(1, 0);
    const auto lvl = sample_lifetime_excursion(2, rng);
    CHECK(lvl == std::vector<std::int32_t>{0, 1, 0});
    CHECK_THROWS_AS(sample_lifetime_excursion(3, rng), std::invalid_argument);
    CHECK_THROWS_AS(sample_lifetime_excursion(0, rng), std::invalid_argument);
}

TEST_CASE("lifetime excursions are strictly positive inside and uniform") {
    Rng rng(2, 0);
    // at 6 steps there are exactly two strict excursions; both should appear
    // with equal frequency
    std::map<std::vector<std::int32_t>, int> counts;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const auto lvl = sample_lifetime_excursion(6, rng);
        REQUIRE(lvl.front() == 0);
        REQUIRE(lvl.back() == 0);
        for (std::size_t k = 1; k + 1 < lvl.size(); ++k) REQUIRE(lvl[k] > 0);
        ++counts[lvl];
    }
    REQUIRE(counts.size() == 2);
    for (const auto& [shape, c] : counts) {
        CHECK(std::abs(c - n / 2) < 4 * std::sqrt(n / 4.0));
    }
}

TEST_CASE("excursion maxima scale like the square root of the length") {
    Rng rng(3, 0);
    const std::size_t n = 10000;
    const int reps = 10000;
    auto median_max = [&](std::size_t steps) {
        std::vector<double> maxima(reps);
        for (int r = 0; r < reps; ++r) {
            const auto lvl = sample_lifetime_excursion(steps, rng);
            maxima[static_cast<std::size_t>(r)] =
                static_cast<double>(*std::max_element(lvl.begin(), lvl.end()));
        }
        return quantile_of(maxima, 0.5);
    };
    const double ratio = median_max(2 * n) / median_max(8 * n);
    CHECK(ratio == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("apex position is symmetric about the midpoint") {
    Rng rng(4, 0);
    const std::size_t steps = 512;
    std::vector<double> apex, mirrored;
    for (int r = 0; r < 4000; ++r) {
        const auto lvl = sample_lifetime_excursion(steps, rng);
        const auto arg = static_cast<double>(
            std::max_element(lvl.begin(), lvl.end()) - lvl.begin());
        apex.push_back(arg);
        mirrored.push_back(static_cast<double>(steps) - arg);
    }
    const KsResult ks = ks_two_sample(apex, mirrored);
    CHECK(ks.p_value > 0.01);
}

TEST_CASE("duration draws follow the inverse square-root tail") {
    SUBCASE("closed-form conditional tail and empirical agreement") {
        Rng rng(5, 0);
        const double s0 = 0.5, cap = 1e6, ds = 1e-3;
        int above = 0;
        const int n = 100000;
        for (int i = 0; i < n; ++i) {
            const auto steps = sample_duration_steps(s0, cap, ds, rng);
            if (static_cast<double>(steps) * ds > 4.0 * s0) ++above;
        }
        // P(s > 4 s0 | s > s0) = 1/2 for the untruncated law; the huge cap
        // makes the truncation correction negligible
        CHECK(static_cast<double>(above) / n == doctest::Approx(0.5).epsilon(0.02));
    }
    SUBCASE("degenerate window is rejected") {
        Rng rng(6, 0);
        CHECK_THROWS_AS(sample_duration_steps(1.0, 1.0, 1e-3, rng), std::invalid_argument);
        SamplingTarget t = SamplingTarget::ito_sigma_gt(1.0, 1e-3);
        t.s_cap = 1.0;  // equal to s0
        CHECK_THROWS_AS(t.validate(), std::invalid_argument);
    }
    SUBCASE("raising the floor raises the draw under shared uniforms") {
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            Rng a(seed, 9), b(seed, 9);
            const auto lo = sample_duration_steps(0.5, 100.0, 1e-3, a);
            const auto hi = sample_duration_steps(1.0, 100.0, 1e-3, b);
            CHECK(hi >= lo);
        }
    }
}

TEST_CASE("labels carry the tree covariance") {
    SUBCASE("one up-down step") {
        Rng rng(7, 0);
        const TreeLikePath tlp = attach_labels({0, 1, 0}, 2.0, 1.0, rng);
        CHECK(tlp.f[0] == 2.0);
        CHECK(tlp.f[2] == 2.0);
        CHECK(tlp.f[1] != 2.0);
    }
    SUBCASE("empirical covariance matches the lifetime minimum") {
        Rng rng(8, 0);
        const auto lvl = sample_lifetime_excursion(60, rng);
        const std::size_t pairs[5][2] = {{5, 12}, {9, 30}, {14, 44}, {21, 35}, {3, 55}};
        const int reps = 20000;
        std::vector<std::vector<double>> rows(reps);
        for (int r = 0; r < reps; ++r) {
            const TreeLikePath tlp = attach_labels(lvl, 0.0, 1.0, rng);
            rows[static_cast<std::size_t>(r)] = tlp.f;
        }
        for (const auto& pr : pairs) {
            double exy = 0.0, ex = 0.0, ey = 0.0;
            for (const auto& f : rows) {
                exy += f[pr[0]] * f[pr[1]];
                ex += f[pr[0]];
                ey += f[pr[1]];
            }
            exy /= reps;
            ex /= reps;
            ey /= reps;
            std::int32_t m = 1 << 30;
            for (std::size_t t = pr[0]; t <= pr[1]; ++t) m = std::min(m, lvl[t]);
            const double want = static_cast<double>(m);  // dt = 1 on this grid
            CHECK(exy - ex * ey == doctest::Approx(want).epsilon(0.05));
        }
        // variance at one index equals the height
        double e2 = 0.0, e1 = 0.0;
        for (const auto& f : rows) {
            e2 += f[20] * f[20];
            e1 += f[20];
        }
        const double var = e2 / reps - (e1 / reps) * (e1 / reps);
        CHECK(var == doctest::Approx(static_cast<double>(lvl[20])).epsilon(0.05));
    }
}

TEST_CASE("conditioned samplers honor their predicates") {
    SUBCASE("minimum below the threshold") {
        const SamplingTarget target = SamplingTarget::n0_min_below(0.4, 1e-3);
        Rng rng(9, 0);
        for (int i = 0; i < 30; ++i) {
            const Sample s = sample(target, rng);
            CHECK(s.path.min_label() <= -0.4);
            CHECK(s.path.f[0] == 0.0);
        }
    }
    SUBCASE("truncated maximum above the threshold, labels nonnegative") {
        SamplingTarget target = SamplingTarget::nstar_max_gt(0.4, 1e-3);
        Rng rng(10, 0);
        for (int i = 0; i < 30; ++i) {
            const Sample s = sample(target, rng);
            CHECK(s.path.max_label() > 0.4);
            CHECK(s.path.min_label() >= 0.0);
            // zeros appear only as path tips: no interior label is 0
            const auto m = interior_minima(s.path);
            for (double v : m) CHECK(v > 0.0);
            CHECK(s.path.f[0] == target.resolved_eps());
        }
    }
    SUBCASE("untruncated variant keeps the whole trajectory") {
        SamplingTarget target = SamplingTarget::neps_trunc_max_gt(0.02, 0.4, 1e-3);
        Rng rng(11, 0);
        const Sample s = sample(target, rng);
        CHECK(truncated_max(s.path, 0.0) > 0.4);
        CHECK(s.path.f[0] == 0.02);
    }
}

TEST_CASE("same seed and stream reproduce identical trajectories") {
    const SamplingTarget target = SamplingTarget::n0_min_below(0.4, 1e-3);
    const Sample a = sample(target, RngState{42, 7});
    const Sample b = sample(target, RngState{42, 7});
    CHECK(a.path.lvl == b.path.lvl);
    CHECK(a.path.f == b.path.f);
    const Sample c = sample(target, RngState{42, 8});
    CHECK(a.path.f != c.path.f);
}

TEST_CASE("sampling at a fine grid then rescaling matches the coarse-grid law") {
    const double ds = 1e-3, s0 = 0.02, lambda = 4.0;
    const std::size_t n = 2500;
    std::vector<double> sigma_scaled, m_scaled, sigma_direct, m_direct;
    {
        const SamplingTarget fine = SamplingTarget::ito_sigma_gt(s0, ds);
        Rng rng(12, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const TreeLikePath up = scale(sample(fine, rng).path, lambda);
            sigma_scaled.push_back(up.duration());
            m_scaled.push_back(up.max_label());
        }
    }
    {
        const SamplingTarget coarse =
            SamplingTarget::ito_sigma_gt(lambda * lambda * s0, lambda * lambda * ds);
        Rng rng(13, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const Sample s = sample(coarse, rng);
            sigma_direct.push_back(s.path.duration());
            m_direct.push_back(s.path.max_label());
        }
    }
    CHECK(ks_two_sample(sigma_scaled, sigma_direct).p_value > 0.01);
    CHECK(ks_two_sample(m_scaled, m_direct).p_value > 0.01);
}

TEST_CASE("acceptance rate grows linearly in the start level") {
    const double delta = 0.5, ds = 1e-3;
    std::vector<double> xs, ys;
    for (double eps : {delta / 40.0, delta / 20.0, delta / 10.0}) {
        SamplingTarget target = SamplingTarget::neps_trunc_max_gt(eps, delta, ds);
        target.s_min = 2.0 * ds;  // shared window across the sweep
        target.s_cap = 50.0;
        SamplerDiag diag;
        Rng rng(14, 0);
        int accepted = 0;
        while (accepted < 150) {
            sample(target, rng, &diag);
            ++accepted;
        }
        xs.push_back(eps);
        ys.push_back(diag.acceptance_rate());
    }
    // least squares on three points
    const double mx = mean_of(xs), my = mean_of(ys);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    const double slope = sxy / sxx;
    const double r2 = sxy * sxy / (sxx * syy);
    CHECK(slope > 0.0);
    CHECK(r2 > 0.9);
}

TEST_CASE("level-biased sampler emits re-rooted truncations with weights") {
    SamplingTarget target = SamplingTarget::nstar_sigma_biased(0.4, 0.3, 1.0, 1e-3);
    Rng rng(15, 0);
    for (int i = 0; i < 5; ++i) {
        const Sample s = sample(target, rng);
        CHECK(s.weight > 0.0);
        CHECK(s.path.f[0] == 0.0);
        CHECK_NOTHROW(s.path.validate());
    }
}

TEST_CASE("impossible targets fail with diagnostics instead of spinning") {
    SamplingTarget target = SamplingTarget::n0_min_below(25.0, 1e-2);
    target.s_cap = 5.0;  // far too small for the requested depth
    target.max_proposals = 3000;
    Rng rng(16, 0);
    CHECK_THROWS_AS(sample(target, rng), std::runtime_error);
}
