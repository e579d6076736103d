#include "snakesim/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "snakesim/exit_measure.hpp"
#include "snakesim/transforms.hpp"

namespace snakesim {

const char* target_kind_name(TargetKind kind) {
    switch (kind) {
        case TargetKind::ItoSigmaGt: return "ITO_SIGMA_GT";
        case TargetKind::N0MinBelow: return "N0_MIN_BELOW";
        case TargetKind::NepsTruncMaxGt: return "NEPS_TRUNC_MAX_GT";
        case TargetKind::NstarMaxGt: return "NSTAR_MAX_GT";
        case TargetKind::NstarSigmaBiased: return "NSTAR_SIGMA_BIASED";
    }
    return "?";
}

TargetKind target_kind_from_name(const std::string& name) {
    if (name == "ITO_SIGMA_GT") return TargetKind::ItoSigmaGt;
    if (name == "N0_MIN_BELOW") return TargetKind::N0MinBelow;
    if (name == "NEPS_TRUNC_MAX_GT") return TargetKind::NepsTruncMaxGt;
    if (name == "NSTAR_MAX_GT") return TargetKind::NstarMaxGt;
    if (name == "NSTAR_SIGMA_BIASED") return TargetKind::NstarSigmaBiased;
    throw std::invalid_argument("unknown sampling target: " + name);
}

double SamplingTarget::dt() const { return std::sqrt(ds); }

double SamplingTarget::resolved_eps() const { return eps > 0.0 ? eps : delta / 20.0; }

double SamplingTarget::resolved_s_min() const {
    if (s_min > 0.0) return s_min;
    switch (kind) {
        case TargetKind::ItoSigmaGt: return s0;
        case TargetKind::N0MinBelow:
        case TargetKind::NstarSigmaBiased: {
            // acceptance is negligible below beta^4 / 600 (labels scale as s^{1/4})
            const double b4 = beta * beta * beta * beta;
            return std::max(2.0 * ds, b4 / 600.0);
        }
        case TargetKind::NepsTruncMaxGt:
        case TargetKind::NstarMaxGt: return 2.0 * ds;
    }
    return 2.0 * ds;
}

double SamplingTarget::resolved_s_cap() const {
    double cap;
    if (s_cap > 0.0) {
        cap = s_cap;
    } else {
        switch (kind) {
            case TargetKind::ItoSigmaGt: cap = std::max(100.0 * s0, 50.0); break;
            case TargetKind::N0MinBelow:
            case TargetKind::NstarSigmaBiased: {
                // tail mass fraction ~ 2 beta^2 / (3 sqrt(2 pi s_cap)) < 0.5%
                const double b4 = beta * beta * beta * beta;
                cap = 3200.0 * b4;
                break;
            }
            case TargetKind::NepsTruncMaxGt:
            case TargetKind::NstarMaxGt: {
                const double d4 = delta * delta * delta * delta;
                cap = std::max(800.0 * d4, 25.0);
                break;
            }
            default: cap = 50.0;
        }
    }
    if (n_max > 0) cap = std::min(cap, static_cast<double>(n_max) * ds);
    return cap;
}

void SamplingTarget::validate() const {
    if (!(ds > 0.0)) throw std::invalid_argument("target: ds must be positive");
    switch (kind) {
        case TargetKind::ItoSigmaGt:
            if (!(s0 > 0.0)) throw std::invalid_argument("target: s0 must be positive");
            break;
        case TargetKind::N0MinBelow:
            if (!(beta > 0.0)) throw std::invalid_argument("target: beta must be positive");
            break;
        case TargetKind::NepsTruncMaxGt:
        case TargetKind::NstarMaxGt:
            if (!(delta > 0.0)) throw std::invalid_argument("target: delta must be positive");
            if (!(resolved_eps() < delta))
                throw std::invalid_argument("target: eps must be smaller than delta");
            break;
        case TargetKind::NstarSigmaBiased:
            if (!(beta > 0.0) || !(delta > 0.0) || !(mu > 0.0))
                throw std::invalid_argument("target: beta, delta, mu must be positive");
            break;
    }
    if (!(resolved_s_min() < resolved_s_cap()))
        throw std::invalid_argument("target: degenerate duration window (s_min >= s_cap)");
}

SamplingTarget SamplingTarget::ito_sigma_gt(double s0, double ds) {
    SamplingTarget t;
    t.kind = TargetKind::ItoSigmaGt;
    t.s0 = s0;
    t.ds = ds;
    return t;
}
SamplingTarget SamplingTarget::n0_min_below(double beta, double ds) {
    SamplingTarget t;
    t.kind = TargetKind::N0MinBelow;
    t.beta = beta;
    t.ds = ds;
    return t;
}
SamplingTarget SamplingTarget::neps_trunc_max_gt(double eps, double delta, double ds) {
    SamplingTarget t;
    t.kind = TargetKind::NepsTruncMaxGt;
    t.eps = eps;
    t.delta = delta;
    t.ds = ds;
    return t;
}
SamplingTarget SamplingTarget::nstar_max_gt(double delta, double ds) {
    SamplingTarget t;
    t.kind = TargetKind::NstarMaxGt;
    t.delta = delta;
    t.ds = ds;
    return t;
}
SamplingTarget SamplingTarget::nstar_sigma_biased(double beta, double delta, double mu,
                                                  double ds) {
    SamplingTarget t;
    t.kind = TargetKind::NstarSigmaBiased;
    t.beta = beta;
    t.delta = delta;
    t.mu = mu;
    t.ds = ds;
    return t;
}

double SamplerDiag::acceptance_rate() const {
    return proposals == 0 ? 0.0
                          : static_cast<double>(accepted) / static_cast<double>(proposals);
}

namespace {
std::size_t stratum_index(double s, double s_min, double s_cap) {
    // log-spaced strata over [s_min, s_cap]
    const double x = std::log(s / s_min) / std::log(s_cap / s_min);
    const auto k = static_cast<long>(x * static_cast<double>(SamplerDiag::kStrata));
    return static_cast<std::size_t>(
        std::clamp<long>(k, 0, static_cast<long>(SamplerDiag::kStrata) - 1));
}
}  // namespace

double SamplerDiag::bottom_stratum_share() const {
    return accepted == 0 ? 0.0
                         : static_cast<double>(stratum_accepted.front()) /
                               static_cast<double>(accepted);
}

double SamplerDiag::top_stratum_share() const {
    return accepted == 0 ? 0.0
                         : static_cast<double>(stratum_accepted.back()) /
                               static_cast<double>(accepted);
}

bool SamplerDiag::window_warning(double tol) const {
    return bottom_stratum_share() > tol || top_stratum_share() > tol;
}

void SamplerDiag::merge(const SamplerDiag& other) {
    proposals += other.proposals;
    accepted += other.accepted;
    for (std::size_t k = 0; k < kStrata; ++k) stratum_accepted[k] += other.stratum_accepted[k];
    s_min = other.s_min;
    s_cap = other.s_cap;
}

std::vector<std::int32_t> sample_lifetime_excursion(std::size_t duration_steps, Rng& rng) {
    if (duration_steps < 2 || duration_steps % 2 != 0)
        throw std::invalid_argument("sample_lifetime_excursion: need an even length >= 2");
    const std::size_t m = duration_steps / 2;

    std::vector<std::int32_t> lvl(duration_steps + 1);
    lvl[0] = 0;
    lvl[1] = 1;
    lvl[duration_steps - 1] = 1;
    lvl[duration_steps] = 0;
    if (m == 1) return lvl;

    // Uniform arrangement of m-1 up-steps and m down-steps (sum -1).
    std::vector<std::int8_t> steps(2 * m - 1, -1);
    for (std::size_t i = 0; i < m - 1; ++i) steps[i] = 1;
    for (std::size_t i = steps.size() - 1; i > 0; --i) {
        std::swap(steps[i], steps[rng.below(i + 1)]);
    }

    // First position of the prefix-sum minimum; starting just past it is the
    // unique rotation that stays nonnegative until the final passage to -1.
    std::int64_t sum = 0, min_sum = 0;
    std::size_t min_pos = 0;
    for (std::size_t j = 0; j < steps.size(); ++j) {
        sum += steps[j];
        if (sum < min_sum) {
            min_sum = sum;
            min_pos = j + 1;
        }
    }

    // Drop the rotated sequence's final step (the -1 passage) and wrap the
    // remaining nonnegative walk one level up.
    std::int32_t level = 1;
    const std::size_t len = steps.size();
    for (std::size_t i = 0; i + 1 < len; ++i) {
        level += steps[(min_pos + i) % len];
        lvl[i + 2] = level;
    }
    return lvl;
}

std::size_t sample_duration_steps(double s_min, double s_cap, double ds, Rng& rng) {
    if (!(0.0 < s_min && s_min < s_cap))
        throw std::invalid_argument("sample_duration_steps: need 0 < s_min < s_cap");
    // inverse CDF of the s^{-3/2} density restricted to (s_min, s_cap]
    const double a = 1.0 / std::sqrt(s_min);
    const double b = 1.0 / std::sqrt(s_cap);
    const double u = rng.uniform();
    const double root = a - u * (a - b);
    const double s = 1.0 / (root * root);
    auto steps = static_cast<std::uint64_t>(std::llround(s / (2.0 * ds))) * 2;
    const auto cap_steps = static_cast<std::uint64_t>(s_cap / ds);
    if (cap_steps >= 2 && steps > cap_steps) steps = cap_steps - (cap_steps % 2);
    return static_cast<std::size_t>(std::max<std::uint64_t>(steps, 2));
}

TreeLikePath attach_labels(const std::vector<std::int32_t>& lifetime_lvl, double start, double ds,
                           Rng& rng) {
    TreeLikePath out;
    out.ds = ds;
    out.dt = std::sqrt(ds);
    const std::size_t n = lifetime_lvl.size();
    out.lvl = lifetime_lvl;
    out.f.resize(n);
    out.edge_min.resize(n);
    out.edge_max.resize(n);
    const double step_sd = std::sqrt(out.dt);  // N(0, dt) increments per edge

    struct Edge {
        double label, lo, hi;
    };
    std::vector<Edge> stack{{start, start, start}};
    stack.reserve(64);
    out.f[0] = start;
    out.edge_min[0] = start;
    out.edge_max[0] = start;
    for (std::size_t i = 1; i < n; ++i) {
        if (lifetime_lvl[i] > lifetime_lvl[i - 1]) {
            const double a = stack.back().label;
            const double b = a + step_sd * rng.gaussian();
            // exact Brownian-bridge extremes of the label path over this edge
            const double gap2 = (a - b) * (a - b);
            const double lo = 0.5 * (a + b - std::sqrt(gap2 + 2.0 * out.dt * rng.exponential()));
            const double hi = 0.5 * (a + b + std::sqrt(gap2 + 2.0 * out.dt * rng.exponential()));
            stack.push_back({b, lo, hi});
            out.edge_min[i] = lo;
            out.edge_max[i] = hi;
        } else {
            // the step down traverses the edge being left
            out.edge_min[i] = stack.back().lo;
            out.edge_max[i] = stack.back().hi;
            stack.pop_back();
        }
        out.f[i] = stack.back().label;
    }
    return out;
}

double truncated_max(const TreeLikePath& tlp, double y) {
    // interior crossing of y kills an index; the max runs over the survivors
    std::vector<double> label_stack{tlp.f[0]};
    std::vector<char> crossed_stack{0};
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < tlp.size(); ++i) {
        const std::int32_t k = tlp.lvl[i];
        if (i > 0) {
            if (k > tlp.lvl[i - 1]) {
                const double prev = label_stack.back();
                const double cur = tlp.f[i];
                const bool cross = (cur == y) || ((cur - y) * (prev - y) < 0.0);
                label_stack.push_back(cur);
                crossed_stack.push_back(static_cast<char>(crossed_stack.back() || cross));
            } else {
                label_stack.pop_back();
                crossed_stack.pop_back();
            }
        }
        const bool interior_crossed =
            (k >= 1) && crossed_stack[static_cast<std::size_t>(k) - 1] != 0;
        if (!interior_crossed) best = std::max(best, tlp.f[i]);
    }
    return best;
}

namespace {

[[noreturn]] void sampling_failure(const SamplingTarget& target, const SamplerDiag& diag,
                                   const char* what) {
    throw std::runtime_error(
        std::string("sampler: ") + what + " for target " + target_kind_name(target.kind) +
        " (proposals=" + std::to_string(diag.proposals) +
        ", accepted=" + std::to_string(diag.accepted) +
        ", acceptance=" + std::to_string(diag.acceptance_rate()) + ")");
}

Sample sample_sigma_biased(const SamplingTarget& target, Rng& rng, SamplerDiag& diag);

}  // namespace

Sample sample(const SamplingTarget& target, Rng& rng, SamplerDiag* diag_out) {
    target.validate();
    SamplerDiag local;
    SamplerDiag& diag = diag_out ? *diag_out : local;
    const double s_min = target.resolved_s_min();
    const double s_cap = target.resolved_s_cap();
    diag.s_min = s_min;
    diag.s_cap = s_cap;

    if (target.kind == TargetKind::NstarSigmaBiased) return sample_sigma_biased(target, rng, diag);

    const double start =
        (target.kind == TargetKind::NepsTruncMaxGt || target.kind == TargetKind::NstarMaxGt)
            ? target.resolved_eps()
            : 0.0;

    std::uint64_t local_proposals = 0;
    while (true) {
        if (local_proposals >= target.max_proposals)
            sampling_failure(target, diag, "proposal cap exceeded");
        if (local_proposals >= 200000 &&
            1.0 / static_cast<double>(local_proposals) < target.acceptance_floor)
            sampling_failure(target, diag, "acceptance rate collapsed");
        ++local_proposals;
        ++diag.proposals;

        const std::size_t steps = sample_duration_steps(s_min, s_cap, target.ds, rng);
        const auto lifetime = sample_lifetime_excursion(steps, rng);
        TreeLikePath tlp = attach_labels(lifetime, start, target.ds, rng);
        const bool grid = target.detection == LevelDetection::GridLabels;

        bool accept = false;
        switch (target.kind) {
            case TargetKind::ItoSigmaGt: accept = true; break;
            case TargetKind::N0MinBelow:
                accept = min_label_under(tlp, target.detection) <= -target.beta;
                break;
            case TargetKind::NepsTruncMaxGt:
            case TargetKind::NstarMaxGt:
                accept = (grid ? truncated_max(tlp, 0.0)
                               : truncated_max_under(tlp, 0.0, target.detection)) > target.delta;
                break;
            default: break;
        }
        if (!accept) continue;

        ++diag.accepted;
        ++diag.stratum_accepted[stratum_index(static_cast<double>(steps) * target.ds, s_min, s_cap)];
        if (target.kind == TargetKind::NstarMaxGt) {
            return {grid ? truncate(tlp, 0.0) : truncate_bridge_exact(tlp, 0.0), 1.0};
        }
        return {std::move(tlp), 1.0};
    }
}

namespace {

Sample sample_sigma_biased(const SamplingTarget& target, Rng& rng, SamplerDiag& diag) {
    // Draw W conditioned on min <= -beta, weight levels b by
    // Z_b * 1{max(tr_{-b}) > delta} * exp(-mu sigma(tr_{-b})) db, emit the
    // truncation at the drawn level re-rooted at a uniform time.  The overall
    // trajectory weight (the level integral) is returned for resampling.
    SamplingTarget inner = target;
    inner.kind = TargetKind::N0MinBelow;

    std::uint64_t attempts = 0;
    while (true) {
        if (++attempts > 64) sampling_failure(target, diag, "level weights kept vanishing");
        Sample base = sample(inner, rng, &diag);
        const double depth = -min_label_under(base.path, target.detection);
        if (!(depth > target.level_db)) continue;

        std::vector<double> levels;
        for (double b = target.level_db; b < depth; b += target.level_db) levels.push_back(b);
        if (levels.empty()) continue;
        const LevelSweep sweep =
            sweep_levels(base.path, levels, target.eps_exit, target.detection);

        std::vector<double> w(levels.size(), 0.0);
        double total = 0.0;
        for (std::size_t k = 0; k < levels.size(); ++k) {
            if (sweep.max_tr[k] > target.delta && sweep.z_hat[k] > 0.0) {
                w[k] = sweep.z_hat[k] * std::exp(-target.mu * sweep.sigma_tr[k]) * target.level_db;
                total += w[k];
            }
        }
        if (total <= 0.0) continue;

        double u = rng.uniform() * total;
        std::size_t pick = 0;
        for (; pick + 1 < w.size(); ++pick) {
            if (u < w[pick]) break;
            u -= w[pick];
        }
        TreeLikePath trunc = target.detection == LevelDetection::GridLabels
                                 ? truncate(base.path, -levels[pick])
                                 : truncate_bridge_exact(base.path, -levels[pick]);
        const std::size_t s = static_cast<std::size_t>(rng.below(trunc.size()));
        return {reroot(trunc, s), total};
    }
}

}  // namespace

}  // namespace snakesim
