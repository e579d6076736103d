#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "snakesim/exit_measure.hpp"
#include "snakesim/rng.hpp"
#include "snakesim/tree.hpp"

namespace snakesim {

/// Conditioned laws the sampler can draw from.
enum class TargetKind {
    ItoSigmaGt,        // lifetime law conditioned on sigma > s0, labels from 0
    N0MinBelow,        // trajectories from 0 conditioned on min label <= -beta
    NepsTruncMaxGt,    // from eps, conditioned on the 0-truncated max > delta (untruncated output)
    NstarMaxGt,        // same conditioning, output truncated at 0
    NstarSigmaBiased,  // level-biased truncations, re-rooted uniformly (weighted)
};

const char* target_kind_name(TargetKind kind);
TargetKind target_kind_from_name(const std::string& name);

/// Deterministic addressing of a sample stream.
struct RngState {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

struct SamplingTarget {
    TargetKind kind = TargetKind::N0MinBelow;
    double ds = 1e-4;

    double s0 = 1.0;     // ItoSigmaGt
    double beta = 0.5;   // N0MinBelow, NstarSigmaBiased
    double eps = 0.0;    // Neps/Nstar start level; 0 resolves to delta / 20
    double delta = 0.5;  // height threshold
    double mu = 1.0;     // NstarSigmaBiased damping

    // How level events (dips, truncations) are decided in the conditioning
    // predicates and the emitted truncations.  BridgeExact uses the sampled
    // per-edge bridge extremes and is the default for statistical work;
    // GridLabels reproduces the deterministic operator semantics, for
    // matched-grid two-sample comparisons.
    LevelDetection detection = LevelDetection::BridgeExact;

    // Duration proposal window; 0 resolves to a per-target default.
    double s_min = 0.0;
    double s_cap = 0.0;
    std::uint64_t n_max = 0;  // optional hard cap on steps per proposal (0 = none)

    std::uint64_t max_proposals = 20'000'000;  // per accepted sample
    double acceptance_floor = 1e-7;

    // Level grid and estimator width for the sigma-biased target.
    double level_db = 0.02;
    double eps_exit = 0.1;

    double dt() const;
    double resolved_eps() const;
    double resolved_s_min() const;
    double resolved_s_cap() const;
    void validate() const;  // throws std::invalid_argument

    static SamplingTarget ito_sigma_gt(double s0, double ds);
    static SamplingTarget n0_min_below(double beta, double ds);
    static SamplingTarget neps_trunc_max_gt(double eps, double delta, double ds);
    static SamplingTarget nstar_max_gt(double delta, double ds);
    static SamplingTarget nstar_sigma_biased(double beta, double delta, double mu, double ds);
};

/// Acceptance bookkeeping, including the duration-window strata monitor: the
/// first/last stratum shares flag windows that clip conditioned mass.
struct SamplerDiag {
    std::uint64_t proposals = 0;
    std::uint64_t accepted = 0;
    static constexpr std::size_t kStrata = 16;
    std::array<std::uint64_t, kStrata> stratum_accepted{};
    double s_min = 0.0, s_cap = 0.0;

    double acceptance_rate() const;
    double bottom_stratum_share() const;
    double top_stratum_share() const;
    bool window_warning(double tol = 0.005) const;
    void merge(const SamplerDiag& other);
};

/// A positive excursion of the +-1 walk with the requested (even) number of
/// steps, exactly uniform over strict excursions: cycle-lemma rotation of a
/// uniform one-short arrangement at its first minimum, wrapped by the
/// mandatory first/last steps.  Throws std::invalid_argument on odd length.
std::vector<std::int32_t> sample_lifetime_excursion(std::size_t duration_steps, Rng& rng);

/// Duration draw from the density proportional to s^{-3/2} on (s_min, s_cap],
/// converted to an even step count on the ds grid (at least 2).
std::size_t sample_duration_steps(double s_min, double s_cap, double ds, Rng& rng);

/// Gaussian labels along the tree of the lifetime walk: up-steps append
/// independent N(0, dt) increments at the tip, down-steps pop.
TreeLikePath attach_labels(const std::vector<std::int32_t>& lifetime_lvl, double start, double ds,
                           Rng& rng);

/// Max label over the indices that survive truncation at y (no crossing of y
/// strictly before the tip); computed without building the truncation.
double truncated_max(const TreeLikePath& tlp, double y);

struct Sample {
    TreeLikePath path;
    double weight = 1.0;  // importance weight; 1 except for NstarSigmaBiased
};

/// One draw from the target law.  Rejection loops are bounded by
/// target.max_proposals and the acceptance floor; violations throw
/// std::runtime_error with diagnostics in the message.
Sample sample(const SamplingTarget& target, Rng& rng, SamplerDiag* diag = nullptr);

inline Sample sample(const SamplingTarget& target, const RngState& state,
                     SamplerDiag* diag = nullptr) {
    Rng rng(state.seed, state.stream);
    return sample(target, rng, diag);
}

}  // namespace snakesim
