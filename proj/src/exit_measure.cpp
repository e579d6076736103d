#include "snakesim/exit_measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace snakesim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::vector<double> interior_minima(const TreeLikePath& tlp) {
    const std::size_t n = tlp.size();
    std::vector<double> out(n, kInf);
    // min_stack[d] = min of labels at heights 1..d along the current path
    std::vector<double> min_stack{kInf};  // height 0 excluded
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            if (tlp.lvl[i] > tlp.lvl[i - 1]) {
                min_stack.push_back(std::min(min_stack.back(), tlp.f[i]));
            } else {
                min_stack.pop_back();
            }
        }
        const std::int32_t k = tlp.lvl[i];
        out[i] = (k >= 2) ? min_stack[static_cast<std::size_t>(k) - 1] : kInf;
    }
    return out;
}

namespace {

std::vector<double> ancestral_edge_minima(const TreeLikePath& tlp) {
    if (!tlp.has_edge_extremes())
        throw std::invalid_argument("bridge-exact detection needs edge extremes");
    const std::size_t n = tlp.size();
    std::vector<double> out(n, kInf);
    std::vector<double> min_stack{kInf};  // min over edges at depths 1..d
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            if (tlp.lvl[i] > tlp.lvl[i - 1]) {
                min_stack.push_back(std::min(min_stack.back(), tlp.edge_min[i]));
            } else {
                min_stack.pop_back();
            }
        }
        out[i] = min_stack.back();
    }
    return out;
}

}  // namespace

std::vector<double> kill_minima(const TreeLikePath& tlp, LevelDetection detection) {
    return detection == LevelDetection::GridLabels ? interior_minima(tlp)
                                                   : ancestral_edge_minima(tlp);
}

double min_label_under(const TreeLikePath& tlp, LevelDetection detection) {
    if (detection == LevelDetection::GridLabels) return tlp.min_label();
    if (!tlp.has_edge_extremes())
        throw std::invalid_argument("bridge-exact detection needs edge extremes");
    double m = tlp.f[0];
    for (std::size_t i = 1; i < tlp.size(); ++i) m = std::min(m, tlp.edge_min[i]);
    return m;
}

double max_label_under(const TreeLikePath& tlp, LevelDetection detection) {
    if (detection == LevelDetection::GridLabels) return tlp.max_label();
    if (!tlp.has_edge_extremes())
        throw std::invalid_argument("bridge-exact detection needs edge extremes");
    double m = tlp.f[0];
    for (std::size_t i = 1; i < tlp.size(); ++i) m = std::max(m, tlp.edge_max[i]);
    return m;
}

double estimate_exit_mass(const TreeLikePath& tlp, double a, double eps,
                          LevelDetection detection) {
    if (!(a > 0.0)) throw std::invalid_argument("estimate_exit_mass: level must be positive");
    if (!(eps > 0.0) || !(eps < a))
        throw std::invalid_argument("estimate_exit_mass: requires 0 < eps < a");
    const auto kill = kill_minima(tlp, detection);
    std::size_t count = 0;
    // Tips are counted strictly inside the window (-a, -a + eps).  Tips at or
    // below -a are grid overshoot of paths that in the scaling limit stop at
    // the level exactly (a set of tip-occupation measure zero).
    for (std::size_t i = 0; i < tlp.size(); ++i) {
        if (kill[i] > -a && tlp.f[i] > -a && tlp.f[i] < -a + eps) ++count;
    }
    return static_cast<double>(count) * tlp.ds / (eps * eps);
}

double estimate_boundary_size(const TreeLikePath& excursion, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("estimate_boundary_size: eps must be positive");
    std::size_t count = 0;
    for (double v : excursion.f) {
        if (v > 0.0 && v < eps) ++count;
    }
    return static_cast<double>(count) * excursion.ds / (eps * eps);
}

BoundaryEstimate estimate_boundary_size_pair(const TreeLikePath& excursion, double eps) {
    return {estimate_boundary_size(excursion, eps),
            estimate_boundary_size(excursion, eps / 2.0)};
}

namespace {

// Adds +1 over the half-open level interval (lo, hi) to a difference array
// defined over the sorted `levels` grid.
void add_interval(const std::vector<double>& levels, std::vector<double>& diff, double lo,
                  double hi) {
    if (!(hi > lo)) return;
    const auto first = std::upper_bound(levels.begin(), levels.end(), lo) - levels.begin();
    const auto last = std::lower_bound(levels.begin(), levels.end(), hi) - levels.begin();
    if (first >= last) return;
    diff[static_cast<std::size_t>(first)] += 1.0;
    diff[static_cast<std::size_t>(last)] -= 1.0;
}

}  // namespace

ExitProfile exit_profile(const TreeLikePath& tlp, const std::vector<double>& levels, double eps,
                         double jump_threshold, LevelDetection detection) {
    if (levels.empty()) throw std::invalid_argument("exit_profile: empty level grid");
    if (!(eps > 0.0)) throw std::invalid_argument("exit_profile: eps must be positive");
    for (std::size_t k = 0; k < levels.size(); ++k) {
        if (!(levels[k] > 0.0) || (k > 0 && !(levels[k] > levels[k - 1])))
            throw std::invalid_argument("exit_profile: levels must be positive and increasing");
    }
    const auto kill = kill_minima(tlp, detection);
    const std::size_t n = tlp.size();
    const std::size_t ngrid = levels.size();

    // Index i is counted at level a iff a > -kill[i], f[i] > -a (strictly
    // above the level) and f[i] < -a + w(a), with width w(a) = min(eps, a/2).
    // Both width regimes are intervals in a; each accumulator is only read
    // where its rule applies.
    std::vector<double> diff_wide(ngrid + 1, 0.0);    // w = eps, read at a >= 2 eps
    std::vector<double> diff_narrow(ngrid + 1, 0.0);  // w = a/2, read at a < 2 eps
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = std::max((kill[i] == kInf) ? 0.0 : -kill[i], -tlp.f[i]);
        add_interval(levels, diff_wide, lo, eps - tlp.f[i]);
        add_interval(levels, diff_narrow, lo, -2.0 * tlp.f[i]);
    }

    ExitProfile profile;
    profile.levels = levels;
    profile.eps = eps;
    profile.z_hat.assign(ngrid, 0.0);
    const double reach = -min_label_under(tlp, detection);
    double acc_wide = 0.0, acc_narrow = 0.0;
    for (std::size_t k = 0; k < ngrid; ++k) {
        acc_wide += diff_wide[k];
        acc_narrow += diff_narrow[k];
        const double a = levels[k];
        if (a >= reach) {
            profile.z_hat[k] = 0.0;  // no lineage reaches -a: exit mass is exactly 0
            continue;
        }
        const double w = std::min(eps, a / 2.0);
        const double count = (a < 2.0 * eps) ? acc_narrow : acc_wide;
        profile.z_hat[k] = count * tlp.ds / (w * w);
    }

    if (jump_threshold > 0.0) {
        for (std::size_t k = 1; k < ngrid; ++k) {
            const double inc = profile.z_hat[k] - profile.z_hat[k - 1];
            if (inc > jump_threshold) profile.jumps.push_back({k, levels[k], inc});
        }
    }
    return profile;
}

double jump_threshold_from_null(const std::vector<double>& null_increments) {
    if (null_increments.size() < 8)
        throw std::invalid_argument("jump_threshold_from_null: need at least 8 increments");
    std::vector<double> xs = null_increments;
    std::sort(xs.begin(), xs.end());
    auto q = [&](double p) {
        const double pos = p * static_cast<double>(xs.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        if (lo + 1 >= xs.size()) return xs.back();
        const double w = pos - static_cast<double>(lo);
        return xs[lo] * (1.0 - w) + xs[lo + 1] * w;
    };
    return 4.0 * (q(0.75) - q(0.25));
}

LevelSweep sweep_levels(const TreeLikePath& tlp, const std::vector<double>& levels, double eps,
                        LevelDetection detection) {
    if (levels.empty()) throw std::invalid_argument("sweep_levels: empty level grid");
    const auto kill = kill_minima(tlp, detection);
    const std::size_t n = tlp.size();
    const std::size_t ngrid = levels.size();

    LevelSweep sweep;
    sweep.levels = levels;
    {
        ExitProfile p = exit_profile(tlp, levels, eps, 0.0, detection);
        sweep.z_hat = std::move(p.z_hat);
    }

    // kept(b) <=> b > kappa_i := -kill_i.  sigma(tr_{-b}) = ds * (kept - runs
    // - 1), where runs(b) counts maximal dropped stretches (each glues one
    // revisit of its base vertex).
    std::vector<double> kept_diff(ngrid + 1, 0.0), runs_diff(ngrid + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double kappa = (kill[i] == kInf) ? 0.0 : -kill[i];
        add_interval(levels, kept_diff, kappa, kInf);
        if (i > 0) {
            const double prev = (kill[i - 1] == kInf) ? 0.0 : -kill[i - 1];
            if (kappa > prev) {  // index i starts a dropped run for b in (prev, kappa]
                const auto first =
                    std::upper_bound(levels.begin(), levels.end(), prev) - levels.begin();
                const auto last =
                    std::upper_bound(levels.begin(), levels.end(), kappa) - levels.begin();
                if (first < last) {
                    runs_diff[static_cast<std::size_t>(first)] += 1.0;
                    runs_diff[static_cast<std::size_t>(last)] -= 1.0;
                }
            }
        }
    }

    sweep.sigma_tr.assign(ngrid, 0.0);
    double kept = 0.0, runs = 0.0;
    for (std::size_t k = 0; k < ngrid; ++k) {
        kept += kept_diff[k];
        runs += runs_diff[k];
        sweep.sigma_tr[k] = (kept - runs - 1.0) * tlp.ds;
    }

    // Label maximum of the truncation: prefix max over contributions sorted
    // by the level at which they enter the kept set.  GridLabels: kept tips.
    // BridgeExact: bridge suprema of edges whose approach stayed alive.
    std::vector<std::pair<double, double>> enter_value;
    enter_value.reserve(n);
    if (detection == LevelDetection::GridLabels) {
        for (std::size_t i = 0; i < n; ++i) {
            const double kappa = (kill[i] == kInf) ? 0.0 : -kill[i];
            enter_value.emplace_back(kappa, tlp.f[i]);
        }
    } else {
        enter_value.emplace_back(0.0, tlp.f[0]);
        std::vector<double> pre_stack{kInf};  // edge minima strictly above depth d
        for (std::size_t i = 1; i < n; ++i) {
            if (tlp.lvl[i] > tlp.lvl[i - 1]) {
                const double pre = pre_stack.back();
                enter_value.emplace_back(pre == kInf ? 0.0 : -pre, tlp.edge_max[i]);
                pre_stack.push_back(std::min(pre, tlp.edge_min[i]));
            } else {
                pre_stack.pop_back();
            }
        }
    }
    std::sort(enter_value.begin(), enter_value.end());
    sweep.max_tr.assign(ngrid, -kInf);
    std::size_t pos = 0;
    double running_max = -kInf;
    for (std::size_t k = 0; k < ngrid; ++k) {
        while (pos < enter_value.size() && enter_value[pos].first < levels[k]) {
            running_max = std::max(running_max, enter_value[pos].second);
            ++pos;
        }
        sweep.max_tr[k] = running_max;
    }
    return sweep;
}

OutsideCounts count_outside_excursions(const TreeLikePath& tlp, double a, double depth,
                                       LevelDetection detection) {
    if (!(a > 0.0) || !(depth > 0.0))
        throw std::invalid_argument("count_outside_excursions: bad arguments");
    const auto kill = kill_minima(tlp, detection);
    const bool bridge = detection == LevelDetection::BridgeExact;
    OutsideCounts counts;
    bool in_run = false;
    double run_min = kInf;
    for (std::size_t i = 0; i < tlp.size(); ++i) {
        const bool dropped = !(kill[i] > -a);
        if (dropped) {
            if (!in_run) {
                in_run = true;
                run_min = kInf;
                ++counts.total;
            }
            run_min = std::min(run_min, bridge ? tlp.edge_min[i] : tlp.f[i]);
        } else if (in_run) {
            in_run = false;
            if (run_min < -(a + depth)) ++counts.deeper_than;
        }
    }
    if (in_run && run_min < -(a + depth)) ++counts.deeper_than;
    return counts;
}

double truncated_max_under(const TreeLikePath& tlp, double y, LevelDetection detection) {
    if (detection == LevelDetection::GridLabels) {
        // valid when the start label sits above y (our only use): an interior
        // dip to or below y is exactly a grid crossing from above
        const auto kill = interior_minima(tlp);
        double best = -kInf;
        for (std::size_t i = 0; i < tlp.size(); ++i) {
            if (kill[i] > y) best = std::max(best, tlp.f[i]);
        }
        return best;
    }
    if (!tlp.has_edge_extremes())
        throw std::invalid_argument("bridge-exact detection needs edge extremes");
    double best = tlp.f[0];
    std::vector<double> pre_stack{kInf};
    for (std::size_t i = 1; i < tlp.size(); ++i) {
        if (tlp.lvl[i] > tlp.lvl[i - 1]) {
            const double pre = pre_stack.back();
            if (pre > y) best = std::max(best, tlp.edge_max[i]);
            pre_stack.push_back(std::min(pre, tlp.edge_min[i]));
        } else {
            pre_stack.pop_back();
        }
    }
    return best;
}

TreeLikePath truncate_bridge_exact(const TreeLikePath& tlp, double y) {
    const auto kill = kill_minima(tlp, LevelDetection::BridgeExact);
    TreeLikePath out;
    out.ds = tlp.ds;
    out.dt = tlp.dt;
    const std::size_t n = tlp.size();
    out.lvl.reserve(n);
    out.f.reserve(n);
    out.edge_min.reserve(n);
    out.edge_max.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(kill[i] > y)) continue;
        if (!out.lvl.empty() && out.lvl.back() == tlp.lvl[i]) continue;  // time-change gluing
        out.lvl.push_back(tlp.lvl[i]);
        out.f.push_back(tlp.f[i]);
        out.edge_min.push_back(tlp.edge_min[i]);
        out.edge_max.push_back(tlp.edge_max[i]);
    }
    return out;
}

}  // namespace snakesim
