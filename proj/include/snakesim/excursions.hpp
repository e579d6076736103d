#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "snakesim/tree.hpp"

namespace snakesim {

/// One excursion above the running ancestral minimum.
struct ExcursionRecord {
    std::int32_t debut_vertex = -1;
    double level = 0.0;   // label of the debut vertex (ancestral minimum there)
    double height = 0.0;  // max of label - level over the component
    std::size_t s_begin = 0;  // contour index entering the component subtree
    std::size_t s_end = 0;    // contour index returning to the debut
    TreeLikePath trajectory;  // shifted, truncated excursion; see extract_excursion
    bool has_trajectory = false;
    double boundary_size = -1.0;  // filled externally; < 0 means unfilled
    double duration = 0.0;        // sigma of `trajectory`

    // Exact discrete accounting used by the partition identity checks.
    std::size_t positive_indices = 0;  // contour indices with V_bullet > 0 in the component
    std::size_t boundary_tips = 0;     // component vertices whose label returned to <= level
};

/// Detects the connected components of {V_bullet > 0}, where V_bullet is the
/// label minus its ancestral running minimum.  Each component hangs below a
/// unique debut vertex; components attached at the tree root are skipped (the
/// root is not an eligible debut).  Records with height > min_height are
/// returned sorted by decreasing level; trajectories are left unfilled.
std::vector<ExcursionRecord> find_debuts(const DiscreteTree& tree, double min_height);

/// Slices the contour between the two visits bounding the component, shifts
/// heights to the debut and labels by -level, truncates at 0, and fills
/// record.trajectory / record.duration.  Throws std::invalid_argument when
/// the record does not belong to this tree.
TreeLikePath extract_excursion(const DiscreteTree& tree, ExcursionRecord& record);

/// The record with the highest level among those with height > min_height and
/// level < -beta, trajectory filled; nullopt when none qualifies.
std::optional<ExcursionRecord> first_excursion(const DiscreteTree& tree, double min_height,
                                               double beta);

/// Per-contour-index component ids of {V_bullet > 0} (-1 on the zero set),
/// root-attached components included; second member is the component count.
std::pair<std::vector<std::int32_t>, std::int32_t> positive_components(const DiscreteTree& tree);

/// Boundary-size estimate of one excursion with bridge-exact killing at its
/// root level, computed on the parent trajectory's contour slice (the parent
/// must carry edge extremes): eps^{-2} ds #{slice tips alive in the window
/// (root, root + eps)}.  The root level is the bridge running minimum of the
/// whole ancestral line through the component top (pass the trajectory's
/// BridgeExact kill_minima as ancestral_floor); it sits slightly below the
/// debut's vertex label and is exactly where the swept kept set flips.
/// root_level_out receives it.
double boundary_size_bridge_exact(const TreeLikePath& parent, const ExcursionRecord& record,
                                  double eps,
                                  const std::vector<double>* ancestral_floor = nullptr,
                                  double* root_level_out = nullptr,
                                  double* sigma_out = nullptr);

}  // namespace snakesim
