#include "snakesim/tree.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace snakesim {

double FinitePath::running_min() const {
    double m = labels[0];
    for (double v : labels) m = std::min(m, v);
    return m;
}

namespace {
std::optional<std::size_t> first_crossing(const std::vector<double>& xs, double y,
                                          std::size_t from) {
    if (from == 0) {
        if (xs[0] == y) return 0;
        from = 1;
    }
    for (std::size_t j = from; j < xs.size(); ++j) {
        if (xs[j] == y || (xs[j] - y) * (xs[j - 1] - y) < 0.0) return j;
    }
    return std::nullopt;
}
}  // namespace

std::optional<std::size_t> tau_hit(const FinitePath& path, double y) {
    return first_crossing(path.labels, y, 0);
}

std::optional<std::size_t> tau_star_hit(const FinitePath& path, double y) {
    return first_crossing(path.labels, y, 1);
}

double TreeLikePath::max_label() const {
    double m = f[0];
    for (double v : f) m = std::max(m, v);
    return m;
}

double TreeLikePath::min_label() const {
    double m = f[0];
    for (double v : f) m = std::min(m, v);
    return m;
}

void TreeLikePath::validate() const {
    if (lvl.empty() || lvl.size() != f.size())
        throw std::invalid_argument("TreeLikePath: size mismatch or empty arrays");
    if (!(ds > 0.0) || !(dt > 0.0))
        throw std::invalid_argument("TreeLikePath: grid steps must be positive");
    if (lvl.front() != 0 || lvl.back() != 0)
        throw std::invalid_argument("TreeLikePath: lifetime must start and end at 0");
    for (std::size_t i = 0; i < lvl.size(); ++i) {
        if (lvl[i] < 0) throw std::invalid_argument("TreeLikePath: negative lifetime level");
        if (i > 0 && std::abs(lvl[i] - lvl[i - 1]) != 1)
            throw std::invalid_argument("TreeLikePath: lifetime step is not +-dt");
    }
}

TreeLikePath make_trivial_path(double start_label, double ds) {
    TreeLikePath out;
    out.ds = ds;
    out.dt = std::sqrt(ds);
    out.lvl = {0};
    out.f = {start_label};
    return out;
}

std::int64_t pseudo_distance_lvl(const std::vector<std::int32_t>& lvl, std::size_t s,
                                 std::size_t t) {
    if (s >= lvl.size() || t >= lvl.size())
        throw std::invalid_argument("pseudo_distance: index out of range");
    const auto [lo, hi] = std::minmax(s, t);
    std::int32_t m = lvl[lo];
    for (std::size_t r = lo; r <= hi; ++r) m = std::min(m, lvl[r]);
    return static_cast<std::int64_t>(lvl[s]) + lvl[t] - 2 * static_cast<std::int64_t>(m);
}

double pseudo_distance(const TreeLikePath& tlp, std::size_t s, std::size_t t) {
    return static_cast<double>(pseudo_distance_lvl(tlp.lvl, s, t)) * tlp.dt;
}

std::size_t lca_time(const std::vector<std::int32_t>& lvl, std::size_t s, std::size_t t) {
    if (s > t || t >= lvl.size()) throw std::invalid_argument("lca_time: bad index range");
    std::size_t arg = s;
    for (std::size_t r = s; r <= t; ++r) {
        if (lvl[r] < lvl[arg]) arg = r;
    }
    return arg;
}

DiscreteTree build_discrete_tree(const TreeLikePath& tlp) {
    tlp.validate();
    const std::size_t n = tlp.size();

    DiscreteTree tree;
    tree.ds = tlp.ds;
    tree.dt = tlp.dt;
    tree.contour.resize(n);
    const std::size_t ups = (n - 1) / 2;
    tree.parent.reserve(ups + 1);
    tree.level.reserve(ups + 1);
    tree.label.reserve(ups + 1);

    std::vector<std::int32_t> stack;
    stack.reserve(64);

    auto add_vertex = [&](std::int32_t par, std::int32_t lv, double lb) {
        tree.parent.push_back(par);
        tree.level.push_back(lv);
        tree.label.push_back(lb);
        return static_cast<std::int32_t>(tree.parent.size()) - 1;
    };

    stack.push_back(add_vertex(-1, 0, tlp.f[0]));
    tree.contour[0] = stack.back();

    for (std::size_t i = 1; i < n; ++i) {
        if (tlp.lvl[i] > tlp.lvl[i - 1]) {
            stack.push_back(add_vertex(stack.back(), tlp.lvl[i], tlp.f[i]));
        } else {
            stack.pop_back();
            if (tlp.f[i] != tree.label[stack.back()])
                throw std::invalid_argument(
                    "build_discrete_tree: label mismatch on revisit (snake condition)");
        }
        tree.contour[i] = stack.back();
    }

    tree.visit_first.assign(tree.n_vertices(), -1);
    tree.visit_last.assign(tree.n_vertices(), -1);
    for (std::size_t i = 0; i < n; ++i) {
        const std::int32_t v = tree.contour[i];
        if (tree.visit_first[v] < 0) tree.visit_first[v] = static_cast<std::int32_t>(i);
        tree.visit_last[v] = static_cast<std::int32_t>(i);
    }
    return tree;
}

bool DiscreteTree::is_ancestor(std::int32_t u, std::int32_t v) const {
    while (v >= 0 && v != u) v = parent[v];
    return v == u;
}

FinitePath treelike_to_snake_path(const TreeLikePath& tlp, std::size_t s) {
    if (s >= tlp.size()) throw std::invalid_argument("treelike_to_snake_path: index out of range");
    const std::int32_t k = tlp.lvl[s];
    FinitePath path;
    path.dt = tlp.dt;
    path.labels.assign(static_cast<std::size_t>(k) + 1, 0.0);
    path.labels[static_cast<std::size_t>(k)] = tlp.f[s];
    // Backward scan: the label at height j is f at the last index <= s whose
    // level equals j with everything in between at least j.
    std::int32_t cur = k;
    for (std::size_t i = s; i > 0 && cur > 0;) {
        --i;
        if (tlp.lvl[i] < cur) {
            cur = tlp.lvl[i];
            path.labels[static_cast<std::size_t>(cur)] = tlp.f[i];
        }
    }
    return path;
}

}  // namespace snakesim
