#include "snakesim/csbp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "snakesim/stats.hpp"

namespace snakesim {

double csbp_transition_laplace(double lambda, double t) {
    if (!(lambda > 0.0) || !(t > 0.0))
        throw std::invalid_argument("csbp_transition_laplace: lambda and t must be positive");
    return catalog::u_t(lambda, t);
}

double levy_step_scale(double dtau) { return std::pow(2.0 * dtau / std::sqrt(3.0), 2.0 / 3.0); }

LevyPath sample_levy(double T, double dtau, Rng& rng, double start, double jump_floor) {
    if (!(T > 0.0) || !(dtau > 0.0))
        throw std::invalid_argument("sample_levy: T and dtau must be positive");
    const auto n = static_cast<std::size_t>(std::llround(T / dtau));
    const double scale = levy_step_scale(dtau);
    const double floor = jump_floor > 0.0 ? jump_floor : 5.0 * std::pow(dtau, 2.0 / 3.0);

    LevyPath path;
    path.dtau = dtau;
    path.times.resize(n + 1);
    path.values.resize(n + 1);
    path.times[0] = 0.0;
    path.values[0] = start;
    for (std::size_t i = 1; i <= n; ++i) {
        const double inc = scale * rng.stable_one_sided(1.5);
        path.times[i] = static_cast<double>(i) * dtau;
        path.values[i] = path.values[i - 1] + inc;
        if (inc > floor) path.jumps.push_back({path.times[i], inc});
    }
    return path;
}

CSBPPath lamperti_csbp_from_levy(const LevyPath& x, double r_step) {
    if (x.values.empty() || !(x.values[0] > 0.0))
        throw std::invalid_argument("lamperti_csbp_from_levy: path must start above 0");
    if (!(r_step > 0.0)) throw std::invalid_argument("lamperti_csbp_from_levy: bad r_step");

    CSBPPath z;
    z.dr = r_step;
    double clock = 0.0;  // accumulated integral of 1/X
    double next_r = 0.0;
    for (std::size_t i = 0; i < x.values.size(); ++i) {
        const double v = x.values[i];
        if (v <= 0.0) {
            z.absorbed_at = next_r;
            break;
        }
        const double advance = x.dtau / v;  // left-endpoint rule
        while (next_r < clock + advance) {
            z.times.push_back(next_r);
            z.values.push_back(v);
            next_r += r_step;
        }
        clock += advance;
    }
    if (z.absorbed_at >= 0.0) {
        z.times.push_back(z.absorbed_at);
        z.values.push_back(0.0);
    }
    return z;
}

LevyPath lamperti_levy_from_csbp(const CSBPPath& z, double tau_step) {
    if (z.values.empty()) throw std::invalid_argument("lamperti_levy_from_csbp: empty path");
    if (!(tau_step > 0.0)) throw std::invalid_argument("lamperti_levy_from_csbp: bad tau_step");

    LevyPath x;
    x.dtau = tau_step;
    double mass = 0.0;  // accumulated integral of Z
    double next_tau = 0.0;
    for (std::size_t i = 0; i < z.values.size(); ++i) {
        const double v = z.values[i];
        if (v <= 0.0) break;  // absorbed: the time change exhausts its domain
        const double advance = z.dr * v;
        while (next_tau < mass + advance) {
            x.times.push_back(next_tau);
            x.values.push_back(v);
            next_tau += tau_step;
        }
        mass += advance;
    }
    return x;
}

SnakeCsbpReport snake_vs_csbp_check(const std::vector<ExitProfile>& profiles, double beta,
                                    const std::vector<double>& ts,
                                    const std::vector<double>& lambdas, int n_bins,
                                    std::size_t min_bin_occupancy) {
    if (profiles.empty()) throw std::invalid_argument("snake_vs_csbp_check: no profiles");
    auto level_index = [&](const ExitProfile& p, double a) {
        std::size_t best = 0;
        double gap = std::abs(p.levels[0] - a);
        for (std::size_t k = 1; k < p.levels.size(); ++k) {
            const double g = std::abs(p.levels[k] - a);
            if (g < gap) {
                gap = g;
                best = k;
            }
        }
        return best;
    };

    // trajectories that actually reach level beta
    std::vector<std::size_t> keep;
    const std::size_t i_beta = level_index(profiles[0], beta);
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        if (profiles[i].z_hat[i_beta] > 0.0) keep.push_back(i);
    }
    if (keep.empty()) throw std::invalid_argument("snake_vs_csbp_check: no mass at beta");

    std::vector<double> zb(keep.size());
    for (std::size_t j = 0; j < keep.size(); ++j) zb[j] = profiles[keep[j]].z_hat[i_beta];
    std::vector<double> edges(static_cast<std::size_t>(n_bins) + 1);
    for (int b = 0; b <= n_bins; ++b) {
        edges[static_cast<std::size_t>(b)] =
            quantile_of(zb, static_cast<double>(b) / static_cast<double>(n_bins));
    }
    edges.back() += 1.0;  // right-closed top bin

    SnakeCsbpReport report;
    for (double t : ts) {
        const std::size_t i_bt = level_index(profiles[0], beta + t);
        for (double lam : lambdas) {
            for (int b = 0; b < n_bins; ++b) {
                SnakeCsbpReport::Row row;
                row.t = t;
                row.lambda = lam;
                double emp = 0.0, pred = 0.0, zsum = 0.0;
                std::size_t n = 0;
                for (std::size_t j = 0; j < keep.size(); ++j) {
                    if (zb[j] < edges[static_cast<std::size_t>(b)] ||
                        zb[j] >= edges[static_cast<std::size_t>(b) + 1])
                        continue;
                    ++n;
                    zsum += zb[j];
                    emp += std::exp(-lam * profiles[keep[j]].z_hat[i_bt]);
                    pred += std::exp(-zb[j] * catalog::u_t(lam, t));
                }
                row.n = n;
                row.sufficient = n >= min_bin_occupancy;
                if (n > 0) {
                    row.z_mean = zsum / static_cast<double>(n);
                    row.empirical = emp / static_cast<double>(n);
                    row.predicted = pred / static_cast<double>(n);
                    row.rel_err = std::abs(row.empirical - row.predicted) /
                                  std::max(row.predicted, 1e-12);
                }
                report.rows.push_back(row);
            }
        }
    }
    return report;
}

}  // namespace snakesim
