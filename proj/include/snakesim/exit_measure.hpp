#pragma once

#include <cstddef>
#include <vector>

#include "snakesim/tree.hpp"

namespace snakesim {

/// How level crossings of the ancestral paths are decided.
///
/// GridLabels: sign change or equality on the stored vertex labels — the
/// deterministic rule the operators use.  Carries an O(dt^{1/2}) boundary
/// layer (killed lineages can hover within one label step of the level).
///
/// BridgeExact: a lineage is killed when the exact Brownian-bridge infimum of
/// one of its edges reaches the level — the hitting law of the label process
/// on the polygonal tree, available when the trajectory carries edge
/// extremes.  Used by the samplers and the statistical estimators.
enum class LevelDetection { GridLabels, BridgeExact };

/// interior_min[i] = min of the labels of W_i at heights 1..k-1 (tip and
/// height 0 excluded); +infinity when the depth is <= 1.  One stack sweep.
std::vector<double> interior_minima(const TreeLikePath& tlp);

/// kill_minima[i]: the statistic compared against a level to decide whether
/// the path W_i died strictly before its tip.  GridLabels: interior label
/// minimum.  BridgeExact: min over all ancestral edge infima (throws
/// std::invalid_argument when the trajectory has no edge extremes).
std::vector<double> kill_minima(const TreeLikePath& tlp, LevelDetection detection);

/// Trajectory-wide label infimum / supremum under the chosen detection.
double min_label_under(const TreeLikePath& tlp, LevelDetection detection);
double max_label_under(const TreeLikePath& tlp, LevelDetection detection);

/// Occupation-density estimate of the exit mass at level -a (a > 0):
/// eps^{-2} * ds * #{ i : W_i alive at its tip, -a < f[i] < -a + eps }.
/// Requires eps < a.  Tips at or below the level are grid overshoot with no
/// continuum occupation and are never counted.
double estimate_exit_mass(const TreeLikePath& tlp, double a, double eps,
                          LevelDetection detection = LevelDetection::GridLabels);

/// Boundary-size estimate of a nonnegative excursion:
/// eps^{-2} * ds * #{ i : 0 < f[i] < eps }.
double estimate_boundary_size(const TreeLikePath& excursion, double eps);

/// Same, bundled with the value at eps/2 as a stability diagnostic.
struct BoundaryEstimate {
    double value = 0.0;
    double value_half_eps = 0.0;
};
BoundaryEstimate estimate_boundary_size_pair(const TreeLikePath& excursion, double eps);

struct ExitProfile {
    std::vector<double> levels;  // increasing, > 0
    std::vector<double> z_hat;   // exit-mass estimates, hard 0 beyond the reach
    double eps = 0.0;
    struct Jump {
        std::size_t index = 0;  // position in `levels`
        double level = 0.0;
        double size = 0.0;
    };
    std::vector<Jump> jumps;
};

/// Profile of exit-mass estimates over a level grid.  Levels the trajectory
/// never reaches are exactly 0.  When jump_threshold > 0, level-to-level
/// increments above it are flagged.  The estimator width at level a is
/// min(eps, a/2).
ExitProfile exit_profile(const TreeLikePath& tlp, const std::vector<double>& levels, double eps,
                         double jump_threshold = 0.0,
                         LevelDetection detection = LevelDetection::GridLabels);

/// 4x interquartile range of a null increment sample; the profile jump flag
/// threshold is calibrated on jump-free increments at matched (eps, ds).
double jump_threshold_from_null(const std::vector<double>& null_increments);

/// Joint sweep over a level grid: exit mass, plus duration and label maximum
/// of the truncation at -b, all in O(n log n + grid).
struct LevelSweep {
    std::vector<double> levels;    // b grid
    std::vector<double> z_hat;     // exit mass at -b (width min(eps, b/2))
    std::vector<double> sigma_tr;  // duration of tr_{-b}
    std::vector<double> max_tr;    // label maximum of tr_{-b}
};
LevelSweep sweep_levels(const TreeLikePath& tlp, const std::vector<double>& levels, double eps,
                        LevelDetection detection = LevelDetection::GridLabels);

/// Excursions outside (-a, infinity): maximal contour stretches killed at -a.
/// Returns the total count and the count of those whose label infimum lies
/// below -(a + depth).
struct OutsideCounts {
    std::size_t total = 0;
    std::size_t deeper_than = 0;
};
OutsideCounts count_outside_excursions(const TreeLikePath& tlp, double a, double depth,
                                       LevelDetection detection = LevelDetection::GridLabels);

/// Label maximum of the trajectory truncated at y, without building the
/// truncation.  Under BridgeExact the maximum runs over the bridge suprema of
/// the surviving edges.
double truncated_max_under(const TreeLikePath& tlp, double y, LevelDetection detection);

/// Truncation at y with bridge-exact killing: keeps the indices whose lineage
/// bridges stay above y, glues the time change, and keeps edge extremes
/// aligned.  The statistical-layer counterpart of the grid operator.
TreeLikePath truncate_bridge_exact(const TreeLikePath& tlp, double y);

}  // namespace snakesim
