#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "snakesim/rng.hpp"

namespace snakesim {

// ---------------------------------------------------------------------------
// Closed-form catalog
// ---------------------------------------------------------------------------

namespace catalog {

/// Mass of trajectories from x whose minimum reaches y < x: 3 / (2 (x-y)^2).
double law_min(double x, double y);

/// Laplace functional of the exit mass at distance gap = x - y > 0:
/// (lambda^{-1/2} + sqrt(2/3) * gap)^{-2}.
double laplace_exit(double lambda, double gap);

/// Transition Laplace exponent of the branching process:
/// u_t(lambda) = (lambda^{-1/2} + sqrt(2/3) t)^{-2}.
double u_t(double lambda, double t);

/// Branching mechanism psi(lambda) = sqrt(8/3) lambda^{3/2}.
double psi(double lambda);

/// Joint exit-mass / duration Laplace block u_{lambda,mu}(b); tanh form for
/// lambda < sqrt(mu/2), coth continuation above, constant at the fixed point.
double u_lambda_mu(double lambda, double mu, double b);

/// Joint density of (boundary size, duration):
/// f(z,s) = (sqrt(3)/(2 pi)) sqrt(z) s^{-5/2} exp(-z^2 / (2 s)).
double f_joint(double z, double s);

/// Boundary-size marginal g(z) = sqrt(3/(2 pi)) z^{-5/2} and its tail integral.
double g_z(double z);
double g_z_tail(double z);  // integral of g over (z, infinity)

/// Duration marginal h(s) = (sqrt(3)/(2 pi)) 2^{-1/4} Gamma(3/4) s^{-7/4}.
double h_sigma(double s);

/// Height-tail constant c0 = 3 pi^{-3/2} Gamma(1/3)^3 Gamma(7/6)^3 (~ 8.27).
/// Recomputed from two independent Gamma implementations; throws
/// std::runtime_error if they disagree beyond 1e-6 relative.
double c0();

/// Lanczos log-gamma, independent of std::lgamma, used to cross-check c0.
double lanczos_lgamma(double x);

}  // namespace catalog

// ---------------------------------------------------------------------------
// Generic numerics
// ---------------------------------------------------------------------------

/// Adaptive Simpson quadrature on [a,b] with absolute tolerance tol.
double integrate(const std::function<double(double)>& fn, double a, double b, double tol);

/// chi-square(3) CDF (closed form via erf).
double chi2_3_cdf(double x);

// ---------------------------------------------------------------------------
// Statistical tests and estimators
// ---------------------------------------------------------------------------

struct KsResult {
    double statistic = 0.0;
    double p_value = 0.0;
};

/// One-sample Kolmogorov-Smirnov against a CDF; asymptotic p-value.
/// Throws std::invalid_argument on an empty sample.
KsResult ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov, asymptotic p-value.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Survival function of the Kolmogorov distribution.
double kolmogorov_survival(double t);

struct LaplacePoint {
    double lambda = 0.0;
    double mean = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

/// Empirical Laplace transform mean(exp(-lambda x)) with a percentile
/// bootstrap confidence interval per lambda.
std::vector<LaplacePoint> empirical_laplace(const std::vector<double>& sample,
                                            const std::vector<double>& lambdas, Rng& rng,
                                            std::size_t n_boot = 200, double level = 0.95);

struct TailFit {
    double exponent = 0.0;
    double stderr_ = 0.0;
    std::size_t n_exceed = 0;
};

/// Hill estimator of a power-law tail index above `threshold`.
/// Throws std::invalid_argument with fewer than 100 exceedances.
TailFit tail_exponent_fit(const std::vector<double>& sample, double threshold);

/// Spearman rank correlation.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

// Small helpers shared by the verification suites.
double mean_of(const std::vector<double>& xs);
double variance_of(const std::vector<double>& xs);
double quantile_of(std::vector<double> xs, double q);  // sorts a copy

}  // namespace snakesim
