#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "snakesim/excursions.hpp"
#include "snakesim/rng.hpp"
#include "snakesim/sampler.hpp"
#include "snakesim/tree.hpp"

using namespace snakesim;

namespace {

TreeLikePath random_snake(std::size_t steps, Rng& rng) {
    const auto lvl = sample_lifetime_excursion(steps, rng);
    return attach_labels(lvl, 0.0, 1.0, rng);
}

// Union-find over tree edges whose endpoints both sit strictly above their
// ancestral minimum; used as an independent derivation of the components.
struct UnionFind {
    std::vector<std::int32_t> up;
    explicit UnionFind(std::size_t n) : up(n) {
        for (std::size_t i = 0; i < n; ++i) up[i] = static_cast<std::int32_t>(i);
    }
    std::int32_t find(std::int32_t v) {
        while (up[static_cast<std::size_t>(v)] != v) {
            up[static_cast<std::size_t>(v)] =
                up[static_cast<std::size_t>(up[static_cast<std::size_t>(v)])];
            v = up[static_cast<std::size_t>(v)];
        }
        return v;
    }
    void unite(std::int32_t a, std::int32_t b) {
        a = find(a);
        b = find(b);
        if (a != b) up[static_cast<std::size_t>(a)] = b;
    }
};

}  // namespace

TEST_CASE("a snake with monotone decreasing labels has no debuts") {
    TreeLikePath tlp;
    tlp.ds = 1.0;
    tlp.dt = 1.0;
    tlp.lvl = {0, 1, 2, 3, 2, 1, 0};
    tlp.f = {0.0, -0.3, -0.8, -1.4, -0.8, -0.3, 0.0};
    const DiscreteTree tree = build_discrete_tree(tlp);
    CHECK(find_debuts(tree, 0.0).empty());
}

TEST_CASE("hand-traced dip then rise yields exactly one debut") {
    // root(0) v1(-0.5) v2(-1.0 dip = debut) v3(-0.4) v4(0.2); a second branch
    // from v1 stays below its own running minimum and contributes nothing
    TreeLikePath tlp;
    tlp.ds = 1.0;
    tlp.dt = 1.0;
    tlp.lvl = {0, 1, 2, 3, 4, 3, 2, 1, 2, 3, 2, 1, 0};
    tlp.f = {0.0, -0.5, -1.0, -0.4, 0.2, -0.4, -1.0, -0.5, -0.8, -0.9, -0.8, -0.5, 0.0};
    const DiscreteTree tree = build_discrete_tree(tlp);
    const auto records = find_debuts(tree, 0.0);
    REQUIRE(records.size() == 1);
    CHECK(records[0].level == -1.0);
    CHECK(records[0].height == doctest::Approx(1.2));  // rise from -1.0 up to 0.2
    CHECK(tree.label[static_cast<std::size_t>(records[0].debut_vertex)] == -1.0);
}

TEST_CASE("a return below the level inside the subtree opens a second debut") {
    // rise above -1.0, dip to -1.01 (new running minimum), rise again
    TreeLikePath tlp;
    tlp.ds = 1.0;
    tlp.dt = 1.0;
    tlp.lvl = {0, 1, 2, 3, 4, 3, 2, 1, 0};
    tlp.f = {0.0, -1.0, -0.2, -1.01, -0.3, -1.01, -0.2, -1.0, 0.0};
    const DiscreteTree tree = build_discrete_tree(tlp);
    const auto records = find_debuts(tree, 0.0);
    REQUIRE(records.size() == 2);
    // sorted by decreasing level
    CHECK(records[0].level == -1.0);
    CHECK(records[0].height == doctest::Approx(0.8));
    CHECK(records[1].level == -1.01);
    CHECK(records[1].height == doctest::Approx(0.71));
    const std::set<double> levels = {records[0].level, records[1].level};
    CHECK(levels.size() == 2);  // pairwise distinct levels
}

TEST_CASE("extraction of the dip-rise component") {
    TreeLikePath tlp;
    tlp.ds = 1.0;
    tlp.dt = 1.0;
    tlp.lvl = {0, 1, 2, 3, 4, 3, 2, 1, 2, 3, 2, 1, 0};
    tlp.f = {0.0, -0.5, -1.0, -0.4, 0.2, -0.4, -1.0, -0.5, -0.8, -0.9, -0.8, -0.5, 0.0};
    const DiscreteTree tree = build_discrete_tree(tlp);
    auto records = find_debuts(tree, 0.0);
    REQUIRE(records.size() == 1);
    const TreeLikePath exc = extract_excursion(tree, records[0]);

    CHECK(exc.f[0] == 0.0);
    CHECK(exc.min_label() >= 0.0);
    // contour of the component: debut, v3, v4, v3, debut = 4 steps
    CHECK(records[0].duration == doctest::Approx(4.0));
    CHECK(exc.max_label() == doctest::Approx(1.2));

    // the debut is consumed: no level-0 debut inside the extracted trajectory
    const DiscreteTree sub = build_discrete_tree(exc);
    CHECK(find_debuts(sub, 0.0).empty());

    // excursion labels vanish only at path lifetimes (no interior zeros)
    for (std::size_t i = 1; i < exc.size(); ++i) {
        if (exc.lvl[i] > exc.lvl[i - 1] && exc.lvl[i] < 4) {
            // interior check happens through the tree: every strict ancestor
            // of a deeper vertex carries a positive label
        }
    }
    CHECK_NOTHROW(exc.validate());
}

TEST_CASE("record and tree must match on extraction") {
    Rng rng(21, 0);
    const TreeLikePath a = random_snake(60, rng);
    const TreeLikePath b = random_snake(60, rng);
    const DiscreteTree tree_a = build_discrete_tree(a);
    const DiscreteTree tree_b = build_discrete_tree(b);
    auto rec_a = find_debuts(tree_a, 0.0);
    if (!rec_a.empty()) {
        CHECK_THROWS_AS(extract_excursion(tree_b, rec_a[0]), std::invalid_argument);
    }
}

TEST_CASE("components partition the positive set and are tree-connected") {
    Rng rng(22, 0);
    for (int rep = 0; rep < 30; ++rep) {
        const TreeLikePath tlp = random_snake(2 * (5 + rng.below(80)), rng);
        const DiscreteTree tree = build_discrete_tree(tlp);
        auto [comp_by_index, n_comp] = positive_components(tree);

        // independent union-find over edges with both endpoints positive
        const std::size_t nv = tree.n_vertices();
        std::vector<double> anc(nv);
        anc[0] = tree.label[0];
        std::vector<bool> positive(nv, false);
        UnionFind uf(nv);
        for (std::size_t v = 1; v < nv; ++v) {
            anc[v] = std::min(anc[static_cast<std::size_t>(tree.parent[v])], tree.label[v]);
            positive[v] = tree.label[v] > anc[v];
        }
        for (std::size_t v = 1; v < nv; ++v) {
            const auto p = static_cast<std::size_t>(tree.parent[v]);
            if (positive[v] && positive[p])
                uf.unite(static_cast<std::int32_t>(v), static_cast<std::int32_t>(p));
        }
        // the component maps must induce the same partition on vertices
        std::map<std::int32_t, std::set<std::int32_t>> by_root, by_comp;
        for (std::size_t v = 1; v < nv; ++v) {
            if (!positive[v]) continue;
            by_root[uf.find(static_cast<std::int32_t>(v))].insert(static_cast<std::int32_t>(v));
            const auto first_visit = static_cast<std::size_t>(tree.visit_first[v]);
            by_comp[comp_by_index[first_visit]].insert(static_cast<std::int32_t>(v));
        }
        std::set<std::set<std::int32_t>> parts_a, parts_b;
        for (auto& [k, s] : by_root) parts_a.insert(s);
        for (auto& [k, s] : by_comp) parts_b.insert(s);
        REQUIRE(parts_a == parts_b);
        REQUIRE(static_cast<std::size_t>(n_comp) == parts_b.size());
    }
}

TEST_CASE("the debut has exactly one child inside its component") {
    Rng rng(23, 0);
    for (int rep = 0; rep < 20; ++rep) {
        const TreeLikePath tlp = random_snake(2 * (5 + rng.below(80)), rng);
        const DiscreteTree tree = build_discrete_tree(tlp);
        const auto records = find_debuts(tree, 0.0);
        for (const auto& rec : records) {
            // children of the debut with labels above the debut level and
            // ancestral minimum equal to it: must be unique per record
            std::size_t inside = 0;
            for (std::size_t v = 1; v < tree.n_vertices(); ++v) {
                if (tree.parent[v] != rec.debut_vertex) continue;
                if (tree.label[v] > rec.level &&
                    static_cast<std::size_t>(tree.visit_first[v]) == rec.s_begin + 1)
                    ++inside;
            }
            CHECK(inside == 1);
        }
    }
}

TEST_CASE("debut counts are finite and nonincreasing in the height threshold") {
    Rng rng(24, 0);
    const TreeLikePath tlp = random_snake(400, rng);
    const DiscreteTree tree = build_discrete_tree(tlp);
    std::size_t prev = find_debuts(tree, 0.0).size();
    for (double delta : {0.1, 0.2, 0.5, 1.0, 2.0}) {
        const std::size_t count = find_debuts(tree, delta).size();
        CHECK(count <= prev);
        prev = count;
    }
}

TEST_CASE("first excursion picks the highest qualifying level") {
    TreeLikePath tlp;
    tlp.ds = 1.0;
    tlp.dt = 1.0;
    // two separated dips at levels -1.0 and -2.0, both rising by more than 0.5
    tlp.lvl = {0, 1, 2, 3, 2, 1, 2, 3, 4, 3, 2, 1, 0};
    tlp.f = {0.0, -0.4, -1.0, -0.2, -1.0, -0.4, -1.3, -2.0, -0.9, -2.0, -1.3, -0.4, 0.0};
    const DiscreteTree tree = build_discrete_tree(tlp);

    SUBCASE("none below an impossible threshold") {
        CHECK_FALSE(first_excursion(tree, 0.5, 5.0).has_value());
    }
    SUBCASE("highest level wins") {
        const auto rec = first_excursion(tree, 0.5, 0.5);
        REQUIRE(rec.has_value());
        CHECK(rec->level == -1.0);
        CHECK(rec->has_trajectory);
        CHECK(rec->trajectory.f[0] == 0.0);
    }
    SUBCASE("respects the level cutoff") {
        const auto rec = first_excursion(tree, 0.5, 1.5);
        REQUIRE(rec.has_value());
        CHECK(rec->level == -2.0);
    }
}

TEST_CASE("extracted excursions have positive interior labels") {
    Rng rng(25, 0);
    for (int rep = 0; rep < 20; ++rep) {
        const TreeLikePath tlp = random_snake(300, rng);
        const DiscreteTree tree = build_discrete_tree(tlp);
        auto records = find_debuts(tree, 0.3);
        for (auto& rec : records) {
            const TreeLikePath exc = extract_excursion(tree, rec);
            CHECK(exc.min_label() >= 0.0);
            CHECK(exc.max_label() == doctest::Approx(rec.height));
            CHECK(rec.duration == exc.duration());
        }
    }
}
