#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace snakesim {

/// One finite path: labels sampled on the lifetime axis at heights
/// 0, dt, 2*dt, ..., zeta.  A single-entry array is the trivial path.
struct FinitePath {
    std::vector<double> labels;
    double dt = 1.0;

    double lifetime() const { return static_cast<double>(labels.size() - 1) * dt; }
    double endpoint() const { return labels.back(); }
    double running_min() const;
};

/// First grid index at which the path crosses level y (value equal to y, or a
/// sign change across y between consecutive entries).  tau ignores nothing;
/// tau_star ignores index 0, which matters only when labels[0] == y.
std::optional<std::size_t> tau_hit(const FinitePath& path, double y);
std::optional<std::size_t> tau_star_hit(const FinitePath& path, double y);

/// A discrete snake trajectory: reflected +-dt walk lifetime (stored as
/// integer levels, h(i) = lvl[i]*dt) paired with tip labels f on the same
/// s-grid.  Grid coupling dt = sqrt(ds).
///
/// Sampled trajectories may also carry the exact Brownian-bridge extremes of
/// the label path over each lifetime edge (edge_min/edge_max, aligned with
/// the step taken into index i; entry 0 is a placeholder).  They refine level
/// detection below the grid scale; deterministic operators never use them.
struct TreeLikePath {
    std::vector<std::int32_t> lvl;  // lifetime in dt units; lvl[0] = lvl[last] = 0
    std::vector<double> f;          // tip labels
    std::vector<double> edge_min;   // optional; bridge infimum of the step-i edge
    std::vector<double> edge_max;   // optional; bridge supremum of the step-i edge
    double ds = 1.0;
    double dt = 1.0;

    bool has_edge_extremes() const { return edge_min.size() == lvl.size(); }

    std::size_t size() const { return lvl.size(); }
    double h(std::size_t i) const { return static_cast<double>(lvl[i]) * dt; }
    /// Contour duration sigma = (#steps) * ds.
    double duration() const { return static_cast<double>(lvl.size() - 1) * ds; }
    double max_label() const;
    double min_label() const;

    /// Throws std::invalid_argument on a malformed walk (bad endpoints,
    /// non-unit steps, negative levels, or size mismatch).
    void validate() const;
};

TreeLikePath make_trivial_path(double start_label, double ds);

/// d_h(s,t) = h(s) + h(t) - 2 min h over [s,t], in dt units (exact integers).
std::int64_t pseudo_distance_lvl(const std::vector<std::int32_t>& lvl, std::size_t s, std::size_t t);
double pseudo_distance(const TreeLikePath& tlp, std::size_t s, std::size_t t);

/// Smallest r in [s,t] achieving min h over [s,t]; requires s <= t.
std::size_t lca_time(const std::vector<std::int32_t>& lvl, std::size_t s, std::size_t t);

/// Explicit tree built from a contour sweep: one vertex per distinct stack
/// state, up-steps create children, down-steps pop.
struct DiscreteTree {
    std::vector<std::int32_t> parent;       // parent[0] = -1 for the root
    std::vector<std::int32_t> level;        // height in dt units
    std::vector<double> label;              // V_u
    std::vector<std::int32_t> contour;      // s-index -> vertex id
    std::vector<std::int32_t> visit_first;  // per-vertex first contour index
    std::vector<std::int32_t> visit_last;   // per-vertex last contour index
    double ds = 1.0;
    double dt = 1.0;

    std::size_t n_vertices() const { return parent.size(); }
    double height(std::size_t v) const { return static_cast<double>(level[v]) * dt; }
    bool is_ancestor(std::int32_t u, std::int32_t v) const;
};

/// Throws std::invalid_argument when the input violates the walk or snake
/// invariants (same stack state must carry the same label).
DiscreteTree build_discrete_tree(const TreeLikePath& tlp);

/// Reconstructs the finite path W_s (labels along the ancestral line of the
/// vertex visited at s) from the tree-like path alone.
FinitePath treelike_to_snake_path(const TreeLikePath& tlp, std::size_t s);

}  // namespace snakesim
