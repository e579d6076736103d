#pragma once

#include <cstddef>
#include <vector>

#include "snakesim/exit_measure.hpp"
#include "snakesim/rng.hpp"

namespace snakesim {

/// Grid-sampled spectrally positive 3/2-stable path (no negative jumps).
struct LevyPath {
    std::vector<double> times;   // i * dtau
    std::vector<double> values;  // U_t, or X_t when started above 0
    double dtau = 0.0;
    struct Jump {
        double t = 0.0;
        double size = 0.0;
    };
    std::vector<Jump> jumps;  // increments above the recording floor
};

/// Grid-sampled branching-process path; nonnegative, absorbing at 0.
struct CSBPPath {
    std::vector<double> times;
    std::vector<double> values;
    double dr = 0.0;
    double absorbed_at = -1.0;  // < 0 while unabsorbed
};

/// Transition Laplace exponent u_t(lambda) = (lambda^{-1/2} + sqrt(2/3) t)^{-2}.
double csbp_transition_laplace(double lambda, double t);

/// Per-step scale making the Laplace exponent per unit time equal to
/// psi(lambda) = sqrt(8/3) lambda^{3/2}: sigma(dtau) = (2 dtau / sqrt(3))^{2/3}.
double levy_step_scale(double dtau);

/// i.i.d. stable increments; jumps recorded by thresholding increments above
/// `jump_floor` (0 resolves to 5 * dtau^{2/3}).
LevyPath sample_levy(double T, double dtau, Rng& rng, double start = 0.0, double jump_floor = 0.0);

/// Time change by the cumulative inverse of X (left-endpoint rule); absorbs at
/// the first grid time X <= 0.  X.values[0] must be positive.
CSBPPath lamperti_csbp_from_levy(const LevyPath& x, double r_step);

/// Inverse time change by cumulative mass of Z; defined up to the total mass
/// integral of Z.
LevyPath lamperti_levy_from_csbp(const CSBPPath& z, double tau_step);

/// Binned comparison of snake exit-mass profiles against the branching-process
/// transition kernel: within bins of Z at level beta, the empirical Laplace
/// transform of Z at level beta + t is compared with mean(exp(-z u_t(lambda))).
struct SnakeCsbpReport {
    struct Row {
        double t = 0.0;
        double lambda = 0.0;
        double z_mean = 0.0;
        std::size_t n = 0;
        double empirical = 0.0;
        double predicted = 0.0;
        double rel_err = 0.0;
        bool sufficient = true;
    };
    std::vector<Row> rows;
};

SnakeCsbpReport snake_vs_csbp_check(const std::vector<ExitProfile>& profiles, double beta,
                                    const std::vector<double>& ts,
                                    const std::vector<double>& lambdas, int n_bins = 4,
                                    std::size_t min_bin_occupancy = 200);

}  // namespace snakesim
