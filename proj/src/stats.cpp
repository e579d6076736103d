#include "snakesim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace snakesim {

namespace catalog {

double law_min(double x, double y) {
    if (!(y < x)) throw std::invalid_argument("law_min: requires y < x");
    const double gap = x - y;
    return 1.5 / (gap * gap);
}

double laplace_exit(double lambda, double gap) {
    const double r = 1.0 / std::sqrt(lambda) + std::sqrt(2.0 / 3.0) * gap;
    return 1.0 / (r * r);
}

double u_t(double lambda, double t) { return laplace_exit(lambda, t); }

double psi(double lambda) { return std::sqrt(8.0 / 3.0) * std::pow(lambda, 1.5); }

double u_lambda_mu(double lambda, double mu, double b) {
    if (!(lambda > 0.0) || !(mu > 0.0) || b < 0.0)
        throw std::invalid_argument("u_lambda_mu: bad arguments");
    const double root = std::sqrt(mu / 2.0);
    const double c = 2.0 / 3.0 + std::sqrt(2.0 / mu) * lambda / 3.0;  // tanh^2 / coth^2 seed
    const double shift = std::pow(2.0 * mu, 0.25) * b;
    if (c == 1.0) return root;  // fixed point: constant in b
    if (c < 1.0) {
        const double x = shift + std::atanh(std::sqrt(c));
        const double t = std::tanh(x);
        return root * (3.0 * t * t - 2.0);
    }
    // lambda > sqrt(mu/2): continuation through coth
    const double sc = std::sqrt(c);
    const double x = shift + 0.5 * std::log((sc + 1.0) / (sc - 1.0));  // acoth(sc)
    const double t = 1.0 / std::tanh(x);
    return root * (3.0 * t * t - 2.0);
}

double f_joint(double z, double s) {
    if (!(z > 0.0) || !(s > 0.0)) return 0.0;
    return std::sqrt(3.0) / (2.0 * std::numbers::pi) * std::sqrt(z) * std::pow(s, -2.5) *
           std::exp(-z * z / (2.0 * s));
}

double g_z(double z) {
    return std::sqrt(3.0 / (2.0 * std::numbers::pi)) * std::pow(z, -2.5);
}

double g_z_tail(double z) {
    return std::sqrt(3.0 / (2.0 * std::numbers::pi)) * (2.0 / 3.0) * std::pow(z, -1.5);
}

double h_sigma(double s) {
    return std::sqrt(3.0) / (2.0 * std::numbers::pi) * std::pow(2.0, -0.25) *
           std::exp(lanczos_lgamma(0.75)) * std::pow(s, -1.75);
}

double lanczos_lgamma(double x) {
    // Lanczos approximation, g = 7, 9 coefficients; |rel err| < 1e-13 on x > 0.
    static const double coef[9] = {0.99999999999980993,  676.5203681218851,
                                   -1259.1392167224028,  771.32342877765313,
                                   -176.61502916214059,  12.507343278686905,
                                   -0.13857109526572012, 9.9843695780195716e-6,
                                   1.5056327351493116e-7};
    if (x < 0.5) {
        // reflection
        return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) -
               lanczos_lgamma(1.0 - x);
    }
    x -= 1.0;
    double a = coef[0];
    const double t = x + 7.5;
    for (int i = 1; i < 9; ++i) a += coef[i] / (x + i);
    return 0.5 * std::log(2.0 * std::numbers::pi) + (x + 0.5) * std::log(t) - t + std::log(a);
}

double c0() {
    auto value = [](auto lg) {
        return 3.0 * std::pow(std::numbers::pi, -1.5) *
               std::exp(3.0 * lg(1.0 / 3.0) + 3.0 * lg(7.0 / 6.0));
    };
    const double via_std = value([](double x) { return std::lgamma(x); });
    const double via_own = value([](double x) { return lanczos_lgamma(x); });
    if (std::abs(via_std - via_own) > 1e-6 * std::abs(via_std))
        throw std::runtime_error("c0: Gamma implementations disagree");
    return via_std;
}

}  // namespace catalog

namespace {
double simpson(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive(const std::function<double(double)>& fn, double a, double fa, double b, double fb,
                double m, double fm, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    if (lm <= a || rm <= m || m <= lm || b <= rm) return whole;  // grid exhausted
    const double flm = fn(lm), frm = fn(rm);
    const double left = simpson(a, fa, m, fm, flm);
    const double right = simpson(m, fm, b, fb, frm);
    const double err = left + right - whole;
    if (depth <= 0 || std::abs(err) <= 15.0 * tol) return left + right + err / 15.0;
    const double half_tol = std::max(tol / 2.0, 1e-18 * std::abs(whole) + 1e-300);
    return adaptive(fn, a, fa, m, fm, lm, flm, left, half_tol, depth - 1) +
           adaptive(fn, m, fm, b, fb, rm, frm, right, half_tol, depth - 1);
}
}  // namespace

double integrate(const std::function<double(double)>& fn, double a, double b, double tol) {
    const double m = 0.5 * (a + b);
    const double fa = fn(a), fb = fn(b), fm = fn(m);
    return adaptive(fn, a, fa, b, fb, m, fm, simpson(a, fa, b, fb, fm), tol, 26);
}

double chi2_3_cdf(double x) {
    if (x <= 0.0) return 0.0;
    return std::erf(std::sqrt(x / 2.0)) -
           std::sqrt(2.0 * x / std::numbers::pi) * std::exp(-x / 2.0);
}

double kolmogorov_survival(double t) {
    if (t <= 0.0) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = 2.0 * ((k % 2 == 1) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * t * t);
        sum += term;
        if (std::abs(term) < 1e-12) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

KsResult ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw std::invalid_argument("ks_distance: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max(d, std::max((i + 1) / n - f, f - i / n));
    }
    const double rn = std::sqrt(n);
    return {d, kolmogorov_survival((rn + 0.12 + 0.11 / rn) * d)};
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    return {d, kolmogorov_survival((ne + 0.12 + 0.11 / ne) * d)};
}

std::vector<LaplacePoint> empirical_laplace(const std::vector<double>& sample,
                                            const std::vector<double>& lambdas, Rng& rng,
                                            std::size_t n_boot, double level) {
    if (sample.empty()) throw std::invalid_argument("empirical_laplace: empty sample");
    const std::size_t n = sample.size();
    std::vector<LaplacePoint> out;
    out.reserve(lambdas.size());
    for (double lam : lambdas) {
        std::vector<double> transformed(n);
        for (std::size_t i = 0; i < n; ++i) transformed[i] = std::exp(-lam * sample[i]);
        LaplacePoint pt;
        pt.lambda = lam;
        pt.mean = mean_of(transformed);
        std::vector<double> boots(n_boot);
        for (std::size_t b = 0; b < n_boot; ++b) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += transformed[rng.below(n)];
            boots[b] = acc / static_cast<double>(n);
        }
        const double tail = (1.0 - level) / 2.0;
        pt.ci_lo = quantile_of(boots, tail);
        pt.ci_hi = quantile_of(boots, 1.0 - tail);
        out.push_back(pt);
    }
    return out;
}

TailFit tail_exponent_fit(const std::vector<double>& sample, double threshold) {
    if (!(threshold > 0.0)) throw std::invalid_argument("tail_exponent_fit: threshold must be > 0");
    double log_sum = 0.0;
    std::size_t n = 0;
    for (double x : sample) {
        if (x > threshold) {
            log_sum += std::log(x / threshold);
            ++n;
        }
    }
    if (n < 100) throw std::invalid_argument("tail_exponent_fit: too few exceedances");
    TailFit fit;
    fit.n_exceed = n;
    fit.exponent = static_cast<double>(n) / log_sum;
    fit.stderr_ = fit.exponent / std::sqrt(static_cast<double>(n));
    return fit;
}

namespace {
std::vector<double> ranks_of(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && xs[idx[j + 1]] == xs[idx[i]]) ++j;
        const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}
}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("spearman: need two samples of equal size >= 2");
    const auto ra = ranks_of(a), rb = ranks_of(b);
    const double ma = mean_of(ra), mb = mean_of(rb);
    double num = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        num += (ra[i] - ma) * (rb[i] - mb);
        va += (ra[i] - ma) * (ra[i] - ma);
        vb += (rb[i] - mb) * (rb[i] - mb);
    }
    return num / std::sqrt(va * vb);
}

double mean_of(const std::vector<double>& xs) {
    double acc = 0.0;
    for (double x : xs) acc += x;
    return acc / static_cast<double>(xs.size());
}

double variance_of(const std::vector<double>& xs) {
    const double m = mean_of(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - m) * (x - m);
    return acc / static_cast<double>(xs.size() - 1);
}

double quantile_of(std::vector<double> xs, double q) {
    if (xs.empty()) throw std::invalid_argument("quantile_of: empty sample");
    std::sort(xs.begin(), xs.end());
    const double pos = q * static_cast<double>(xs.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= xs.size()) return xs.back();
    const double w = pos - static_cast<double>(lo);
    return xs[lo] * (1.0 - w) + xs[lo + 1] * w;
}

}  // namespace snakesim
