#pragma once

#include <cstdint>
#include <vector>

#include "snakesim/tree.hpp"

namespace snakesim {

/// Shift every label by a; the tree is unchanged.
TreeLikePath translate(const TreeLikePath& tlp, double a);

/// Re-root the trajectory at contour time s and shift labels so the new root
/// carries label 0.  Cyclic index arithmetic on the step range; the quotient
/// tree is carried by an isometry, so sigma and pairwise distances survive.
TreeLikePath reroot(const TreeLikePath& tlp, std::size_t s);

/// Truncation at level y: keeps exactly the s-indices whose path reaches its
/// tip before crossing y (crossing detected by grid sign change or equality,
/// height 0 excluded).  Crossing tips are clamped to y, so paths of the
/// output meet y only at their lifetime.  Consecutive survivors with equal
/// lifetime collapse to one index (the discrete time change).
TreeLikePath truncate(const TreeLikePath& tlp, double y);

/// Space-time scaling: sigma -> lambda^2 sigma, heights -> lambda * heights,
/// labels -> sqrt(lambda) * labels.  lambda must be an exact square of a
/// representable number (sqrt(lambda)^2 == lambda) so grids stay closed;
/// otherwise throws std::invalid_argument.
TreeLikePath scale(const TreeLikePath& tlp, double lambda);

/// Labels reflected above their ancestral running minimum, paired with the
/// per-index local-time proxy l_bullet = -(ancestral running min).
/// Satisfies f[i] = f_bullet[i] - l_bullet[i] exactly.
struct ReflectedPair {
    TreeLikePath w_bullet;          // labels f_bullet >= 0, same lifetime
    std::vector<double> l_bullet;   // nondecreasing along every branch
};

/// Requires f[0] == 0 (throws std::invalid_argument otherwise).
ReflectedPair reflect_min(const TreeLikePath& tlp);

/// Reassemble a signed trajectory from a reflected pair: label = sign_c *
/// f_bullet on component c of {f_bullet > 0}, 0 on the zero set.
/// comp_of_index[i] is the component id of s-index i, or -1 on the zero set;
/// signs.size() must equal the number of components.
TreeLikePath assign_signs(const ReflectedPair& pair,
                          const std::vector<std::int32_t>& comp_of_index,
                          const std::vector<int>& signs);

}  // namespace snakesim
