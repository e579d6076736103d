#include "snakesim/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace snakesim {

TreeLikePath translate(const TreeLikePath& tlp, double a) {
    TreeLikePath out = tlp;
    for (double& v : out.f) v += a;
    return out;
}

TreeLikePath reroot(const TreeLikePath& tlp, std::size_t s) {
    const std::size_t n = tlp.size();
    if (s >= n) throw std::invalid_argument("reroot: index out of range");
    const std::size_t steps = n - 1;

    TreeLikePath out;
    out.ds = tlp.ds;
    out.dt = tlp.dt;
    out.lvl.resize(n);
    out.f.resize(n);

    // Running minima away from s in both directions; the cyclic interval
    // [s ^ (s+r)] is always a plain interval on one side of s.
    std::vector<std::int32_t> min_right(n), min_left(n);
    min_right[s] = tlp.lvl[s];
    for (std::size_t j = s + 1; j < n; ++j) min_right[j] = std::min(min_right[j - 1], tlp.lvl[j]);
    min_left[s] = tlp.lvl[s];
    for (std::size_t j = s; j > 0; --j) min_left[j - 1] = std::min(min_left[j], tlp.lvl[j - 1]);

    const double base = tlp.f[s];
    for (std::size_t r = 0; r <= steps; ++r) {
        const std::size_t j = (s + r <= steps) ? s + r : s + r - steps;
        const std::int32_t m = (s + r <= steps) ? min_right[j] : min_left[j];
        out.lvl[r] = tlp.lvl[j] + tlp.lvl[s] - 2 * m;
        out.f[r] = tlp.f[j] - base;
    }
    return out;
}

TreeLikePath truncate(const TreeLikePath& tlp, double y) {
    const std::size_t n = tlp.size();

    TreeLikePath out;
    out.ds = tlp.ds;
    out.dt = tlp.dt;
    out.lvl.reserve(n);
    out.f.reserve(n);

    // Per-level stacks along the current ancestral path: the label at each
    // height and whether the path has crossed y at or below that height
    // (height 0 never counts).
    std::vector<double> label_stack{tlp.f[0]};
    std::vector<char> crossed_stack{0};

    auto push_out = [&](std::int32_t lv, double lb) {
        if (!out.lvl.empty() && out.lvl.back() == lv) return;  // time-change gluing
        out.lvl.push_back(lv);
        out.f.push_back(lb);
    };

    for (std::size_t i = 0; i < n; ++i) {
        const std::int32_t k = tlp.lvl[i];
        if (i > 0) {
            if (k > tlp.lvl[i - 1]) {
                const double prev = label_stack.back();
                const double cur = tlp.f[i];
                const bool cross_here = (cur == y) || ((cur - y) * (prev - y) < 0.0);
                label_stack.push_back(cur);
                crossed_stack.push_back(
                    static_cast<char>(crossed_stack.back() || cross_here));
            } else {
                label_stack.pop_back();
                crossed_stack.pop_back();
            }
        }
        // Keep the index when no crossing occurred strictly before the tip.
        const bool interior_crossed =
            (k >= 1) ? (crossed_stack[static_cast<std::size_t>(k) - 1] != 0) : false;
        if (interior_crossed) continue;

        double lb = tlp.f[i];
        if (k >= 1) {
            const bool cross_at_tip = crossed_stack[static_cast<std::size_t>(k)] != 0;
            if (cross_at_tip) lb = y;  // clamp grid overshoot to the level itself
        }
        push_out(k, lb);
    }
    return out;
}

TreeLikePath scale(const TreeLikePath& tlp, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("scale: lambda must be positive");
    const double rho = std::sqrt(lambda);
    if (rho * rho != lambda)
        throw std::invalid_argument("scale: lambda is not an exact square, grid not closed");
    TreeLikePath out = tlp;
    out.ds = tlp.ds * lambda * lambda;
    out.dt = tlp.dt * lambda;
    for (double& v : out.f) v *= rho;
    return out;
}

ReflectedPair reflect_min(const TreeLikePath& tlp) {
    if (tlp.f[0] != 0.0) throw std::invalid_argument("reflect_min: initial label must be 0");
    const std::size_t n = tlp.size();

    ReflectedPair out;
    out.w_bullet.ds = tlp.ds;
    out.w_bullet.dt = tlp.dt;
    out.w_bullet.lvl = tlp.lvl;
    out.w_bullet.f.resize(n);
    out.l_bullet.resize(n);

    // min of labels along the ancestral path, heights 0..tip inclusive
    std::vector<double> min_stack{0.0};
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            if (tlp.lvl[i] > tlp.lvl[i - 1]) {
                min_stack.push_back(std::min(min_stack.back(), tlp.f[i]));
            } else {
                min_stack.pop_back();
            }
        }
        const double m = min_stack.back();
        out.w_bullet.f[i] = tlp.f[i] - m;
        out.l_bullet[i] = -m;
    }
    return out;
}

TreeLikePath assign_signs(const ReflectedPair& pair,
                          const std::vector<std::int32_t>& comp_of_index,
                          const std::vector<int>& signs) {
    const std::size_t n = pair.w_bullet.size();
    if (comp_of_index.size() != n)
        throw std::invalid_argument("assign_signs: component map size mismatch");
    std::int32_t n_comp = 0;
    for (std::int32_t c : comp_of_index) n_comp = std::max(n_comp, c + 1);
    if (static_cast<std::size_t>(n_comp) != signs.size())
        throw std::invalid_argument("assign_signs: sign count does not match component count");
    for (int s : signs) {
        if (s != 1 && s != -1) throw std::invalid_argument("assign_signs: signs must be +-1");
    }

    TreeLikePath out = pair.w_bullet;
    for (std::size_t i = 0; i < n; ++i) {
        const std::int32_t c = comp_of_index[i];
        if (c >= 0) {
            out.f[i] = signs[static_cast<std::size_t>(c)] * pair.w_bullet.f[i];
        } else {
            out.f[i] = 0.0;
        }
    }
    return out;
}

}  // namespace snakesim
