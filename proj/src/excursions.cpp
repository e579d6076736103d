#include "snakesim/excursions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "snakesim/transforms.hpp"

namespace snakesim {

namespace {

struct ComponentScan {
    std::vector<double> anc_min;       // per-vertex ancestral running minimum
    std::vector<std::int32_t> comp;    // per-vertex component id, -1 outside
    std::vector<std::int32_t> top;     // per-component top vertex
    std::int32_t n_comp = 0;
};

ComponentScan scan_components(const DiscreteTree& tree) {
    const std::size_t nv = tree.n_vertices();
    ComponentScan scan;
    scan.anc_min.resize(nv);
    scan.comp.assign(nv, -1);
    scan.anc_min[0] = tree.label[0];
    // vertices are created parents-first, so a forward pass suffices
    for (std::size_t v = 1; v < nv; ++v) {
        const std::int32_t p = tree.parent[v];
        scan.anc_min[v] = std::min(scan.anc_min[static_cast<std::size_t>(p)], tree.label[v]);
        if (tree.label[v] > scan.anc_min[v]) {  // V_bullet > 0
            if (scan.comp[static_cast<std::size_t>(p)] >= 0) {
                scan.comp[v] = scan.comp[static_cast<std::size_t>(p)];
            } else {
                scan.comp[v] = scan.n_comp++;
                scan.top.push_back(static_cast<std::int32_t>(v));
            }
        }
    }
    return scan;
}

}  // namespace

std::vector<ExcursionRecord> find_debuts(const DiscreteTree& tree, double min_height) {
    if (min_height < 0.0) throw std::invalid_argument("find_debuts: min_height must be >= 0");
    const ComponentScan scan = scan_components(tree);
    const std::size_t nv = tree.n_vertices();

    std::vector<double> comp_max(static_cast<std::size_t>(scan.n_comp),
                                 -std::numeric_limits<double>::infinity());
    std::vector<std::size_t> comp_tips(static_cast<std::size_t>(scan.n_comp), 0);
    for (std::size_t v = 1; v < nv; ++v) {
        const std::int32_t c = scan.comp[v];
        if (c >= 0) {
            comp_max[static_cast<std::size_t>(c)] =
                std::max(comp_max[static_cast<std::size_t>(c)], tree.label[v]);
        } else {
            const std::int32_t pc = scan.comp[static_cast<std::size_t>(tree.parent[v])];
            if (pc >= 0) ++comp_tips[static_cast<std::size_t>(pc)];  // dip back to the level
        }
    }

    // contour visits per vertex = 1 + number of children
    std::vector<std::size_t> visits(nv, 1);
    for (std::size_t v = 1; v < nv; ++v) ++visits[static_cast<std::size_t>(tree.parent[v])];
    std::vector<std::size_t> comp_indices(static_cast<std::size_t>(scan.n_comp), 0);
    for (std::size_t v = 1; v < nv; ++v) {
        const std::int32_t c = scan.comp[v];
        if (c >= 0) comp_indices[static_cast<std::size_t>(c)] += visits[v];
    }

    std::vector<ExcursionRecord> records;
    for (std::int32_t c = 0; c < scan.n_comp; ++c) {
        const std::int32_t top = scan.top[static_cast<std::size_t>(c)];
        const std::int32_t debut = tree.parent[static_cast<std::size_t>(top)];
        if (debut == 0) continue;  // root-attached components are not debuts
        ExcursionRecord rec;
        rec.debut_vertex = debut;
        rec.level = tree.label[static_cast<std::size_t>(debut)];
        rec.height = comp_max[static_cast<std::size_t>(c)] - rec.level;
        rec.s_begin = static_cast<std::size_t>(tree.visit_first[static_cast<std::size_t>(top)]) - 1;
        rec.s_end = static_cast<std::size_t>(tree.visit_last[static_cast<std::size_t>(top)]) + 1;
        rec.positive_indices = comp_indices[static_cast<std::size_t>(c)];
        rec.boundary_tips = comp_tips[static_cast<std::size_t>(c)];
        if (rec.height > min_height) records.push_back(std::move(rec));
    }
    std::sort(records.begin(), records.end(), [](const ExcursionRecord& a, const ExcursionRecord& b) {
        if (a.level != b.level) return a.level > b.level;
        return a.s_begin < b.s_begin;
    });
    return records;
}

TreeLikePath extract_excursion(const DiscreteTree& tree, ExcursionRecord& record) {
    const std::size_t n = tree.contour.size();
    if (record.debut_vertex < 0 ||
        static_cast<std::size_t>(record.debut_vertex) >= tree.n_vertices() ||
        record.s_end >= n || record.s_begin >= record.s_end ||
        tree.contour[record.s_begin] != record.debut_vertex ||
        tree.contour[record.s_end] != record.debut_vertex ||
        tree.label[static_cast<std::size_t>(record.debut_vertex)] != record.level)
        throw std::invalid_argument("extract_excursion: record does not match tree");

    const std::int32_t base_lvl = tree.level[static_cast<std::size_t>(record.debut_vertex)];
    TreeLikePath sub;
    sub.ds = tree.ds;
    sub.dt = tree.dt;
    sub.lvl.reserve(record.s_end - record.s_begin + 1);
    sub.f.reserve(record.s_end - record.s_begin + 1);
    for (std::size_t i = record.s_begin; i <= record.s_end; ++i) {
        const std::int32_t v = tree.contour[i];
        sub.lvl.push_back(tree.level[static_cast<std::size_t>(v)] - base_lvl);
        sub.f.push_back(tree.label[static_cast<std::size_t>(v)] - record.level);
    }
    record.trajectory = truncate(sub, 0.0);
    record.has_trajectory = true;
    record.duration = record.trajectory.duration();
    return record.trajectory;
}

std::optional<ExcursionRecord> first_excursion(const DiscreteTree& tree, double min_height,
                                               double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("first_excursion: beta must be positive");
    auto records = find_debuts(tree, min_height);
    for (auto& rec : records) {
        if (rec.level < -beta) {  // records are sorted by decreasing level
            extract_excursion(tree, rec);
            return rec;
        }
    }
    return std::nullopt;
}

std::pair<std::vector<std::int32_t>, std::int32_t> positive_components(const DiscreteTree& tree) {
    const ComponentScan scan = scan_components(tree);
    std::vector<std::int32_t> by_index(tree.contour.size(), -1);
    for (std::size_t i = 0; i < tree.contour.size(); ++i) {
        by_index[i] = scan.comp[static_cast<std::size_t>(tree.contour[i])];
    }
    return {std::move(by_index), scan.n_comp};
}

double boundary_size_bridge_exact(const TreeLikePath& parent, const ExcursionRecord& record,
                                  double eps,
                                  const std::vector<double>* ancestral_floor,
                                  double* root_level_out, double* sigma_out) {
    if (!parent.has_edge_extremes())
        throw std::invalid_argument("boundary_size_bridge_exact: parent has no edge extremes");
    if (!(eps > 0.0)) throw std::invalid_argument("boundary_size_bridge_exact: bad eps");
    if (record.s_end >= parent.size() || record.s_begin >= record.s_end)
        throw std::invalid_argument("boundary_size_bridge_exact: record does not match parent");
    // Root level: the bridge running minimum along the full ancestral line
    // entering the component.  The vertex label of the debut lies slightly
    // above it (every adjacent edge dips below its endpoints).
    double root_level = std::min(record.level, parent.edge_min[record.s_begin + 1]);
    if (ancestral_floor) {
        root_level = std::min(root_level, (*ancestral_floor)[record.s_begin + 1]);
    }
    if (root_level_out) *root_level_out = root_level;

    // Lineages die on dipping strictly below the root; the defining dip sits
    // on an edge that only touches it.
    std::vector<double> slice_min{std::numeric_limits<double>::infinity()};
    std::size_t count = 0, alive = 1;  // the debut visit itself
    std::int32_t prev_alive_lvl = parent.lvl[record.s_begin];
    for (std::size_t i = record.s_begin + 1; i <= record.s_end; ++i) {
        if (parent.lvl[i] > parent.lvl[i - 1]) {
            slice_min.push_back(std::min(slice_min.back(), parent.edge_min[i]));
        } else {
            slice_min.pop_back();
        }
        if (slice_min.back() < root_level) continue;
        const double tip = parent.f[i];
        if (tip > root_level && tip < root_level + eps) ++count;
        if (parent.lvl[i] != prev_alive_lvl) {  // time-change gluing
            ++alive;
            prev_alive_lvl = parent.lvl[i];
        }
    }
    if (sigma_out) *sigma_out = static_cast<double>(alive - 1) * parent.ds;
    return static_cast<double>(count) * parent.ds / (eps * eps);
}

}  // namespace snakesim
