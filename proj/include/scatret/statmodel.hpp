#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "scatret/dwt.hpp"
#include "scatret/scattering.hpp"
#include "scatret/signature.hpp"

namespace scatret {

/// Weibull parameters in the rate form p(x) = lambda*k*(lambda*x)^(k-1) *
/// exp(-(lambda*x)^k); lambda is the reciprocal of the conventional scale.
struct WeibullParams {
    double lambda = 1.0;
    double k = 1.0;
};

struct GgdParams {
    double alpha = 1.0;  ///< scale
    double beta = 2.0;   ///< shape (2 = Gaussian, 1 = Laplacian)
};

inline double weibull_pdf(double x, const WeibullParams& p) {
    if (x < 0.0) return 0.0;
    if (x == 0.0) return p.k > 1.0 ? 0.0 : (p.k == 1.0 ? p.lambda : std::numeric_limits<double>::infinity());
    const double lx = p.lambda * x;
    return p.lambda * p.k * std::pow(lx, p.k - 1.0) * std::exp(-std::pow(lx, p.k));
}

inline double weibull_cdf(double x, const WeibullParams& p) {
    if (x <= 0.0) return 0.0;
    return -std::expm1(-std::pow(p.lambda * x, p.k));
}

/// Inverse CDF: x = (1/lambda) * (-ln(1-u))^(1/k).
inline double weibull_quantile(double u, const WeibullParams& p) {
    return std::pow(-std::log1p(-u), 1.0 / p.k) / p.lambda;
}

inline double ggd_pdf(double x, const GgdParams& p) {
    const double log_norm = std::log(p.beta) - std::log(2.0 * p.alpha) - std::lgamma(1.0 / p.beta);
    return std::exp(log_norm - std::pow(std::abs(x) / p.alpha, p.beta));
}

namespace detail {

inline void check_weibull_params(const WeibullParams& p) {
    if (!(p.lambda > 0.0) || !(p.k > 0.0) || !std::isfinite(p.lambda) || !std::isfinite(p.k))
        throw std::invalid_argument("Weibull parameters must be positive and finite");
}

inline void check_positive_samples(std::span<const double> samples) {
    if (samples.empty())
        throw std::invalid_argument("empty sample list");
    for (double x : samples)
        if (!(x > 0.0) || !std::isfinite(x))
            throw std::invalid_argument("samples must be positive and finite");
}

}  // namespace detail

/// Weibull log-likelihood N*k*ln(lambda) + N*ln(k) + (k-1)*sum(ln x) -
/// sum((lambda*x)^k).
inline double weibull_loglik(const WeibullParams& params, std::span<const double> samples) {
    detail::check_weibull_params(params);
    detail::check_positive_samples(samples);
    const double n = static_cast<double>(samples.size());
    double sum_log = 0.0, sum_pow = 0.0;
    for (double x : samples) {
        sum_log += std::log(x);
        sum_pow += std::exp(params.k * (std::log(params.lambda) + std::log(x)));
    }
    return n * params.k * std::log(params.lambda) + n * std::log(params.k) +
           (params.k - 1.0) * sum_log - sum_pow;
}

/// Closed-form ML rate parameter for a fixed shape k:
/// lambda* = ((1/N) sum x_i^k)^(-1/k). Evaluated on max-standardized samples
/// so x^k never overflows.
inline double weibull_lambda_star(std::span<const double> samples, double k) {
    detail::check_positive_samples(samples);
    if (!(k > 0.0) || !std::isfinite(k))
        throw std::invalid_argument("weibull_lambda_star: k must be positive");
    const double m = *std::max_element(samples.begin(), samples.end());
    double acc = 0.0;
    for (double x : samples) acc += std::pow(x / m, k);
    acc /= static_cast<double>(samples.size());
    return std::pow(acc, -1.0 / k) / m;
}

/// Weibull ML fit. Samples at or below `floor` are discarded (the
/// log-likelihood needs ln x); at least 16 samples with two distinct values
/// must remain. The shape equation
///   N/k + sum(ln x) - N * sum(ln(x) x^k) / sum(x^k) = 0
/// is strictly decreasing in k and solved by Newton-Raphson with a bisection
/// safeguard on k in [1e-3, 1e3], to |residual| <= 1e-9*N in at most 100
/// iterations. Initial k from the log-moment heuristic
/// k0 = pi / (sqrt(6) * std(ln x)).
inline WeibullParams weibull_fit(std::span<const double> samples, double floor) {
    if (!(floor > 0.0))
        throw std::invalid_argument("weibull_fit: floor must be positive");
    std::vector<double> kept;
    kept.reserve(samples.size());
    for (double x : samples) {
        if (!std::isfinite(x) || x < 0.0)
            throw std::invalid_argument("weibull_fit: samples must be nonnegative and finite");
        if (x > floor) kept.push_back(x);
    }
    if (kept.size() < 16)
        throw std::runtime_error("weibull_fit: too few samples (" + std::to_string(kept.size()) +
                                 " above floor)");
    const double m = *std::max_element(kept.begin(), kept.end());
    bool distinct = false;
    for (double x : kept)
        if (x != m) {
            distinct = true;
            break;
        }
    if (!distinct)
        throw std::runtime_error("weibull_fit: degenerate sample");

    const double n = static_cast<double>(kept.size());
    std::vector<double> log_y(kept.size());
    double sum_log = 0.0, sum_log_sq = 0.0;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        log_y[i] = std::log(kept[i] / m);  // <= 0; the max-standardized sample hits exactly 0
        sum_log += log_y[i];
        sum_log_sq += log_y[i] * log_y[i];
    }

    // Shape equation and derivative on the standardized samples (the
    // standardization shift cancels between the two log terms).
    auto eval = [&](double k, double& f, double& df) {
        double s = 0.0, t = 0.0, u = 0.0;
        for (double ly : log_y) {
            const double w = std::exp(k * ly);
            s += w;
            t += w * ly;
            u += w * ly * ly;
        }
        const double wmean = t / s;
        f = n / k + sum_log - n * wmean;
        df = -n / (k * k) - n * (u / s - wmean * wmean);
    };

    const double var_log = sum_log_sq / n - (sum_log / n) * (sum_log / n);
    double k = std::numbers::pi / (std::sqrt(6.0) * std::sqrt(std::max(var_log, 1e-300)));
    double lo = 1e-3, hi = 1e3;
    k = std::clamp(k, lo, hi);

    const double tol = 1e-9 * n;
    bool converged = false;
    for (int iter = 0; iter < 100; ++iter) {
        double f, df;
        eval(k, f, df);
        if (std::abs(f) <= tol) {
            converged = true;
            break;
        }
        if (f > 0.0)
            lo = k;  // root is to the right (f is decreasing)
        else
            hi = k;
        double next = k - f / df;
        if (!std::isfinite(next) || next <= lo || next >= hi) next = 0.5 * (lo + hi);
        k = next;
    }
    if (!converged)
        throw std::runtime_error("weibull_fit: shape equation did not converge");

    WeibullParams params{weibull_lambda_star(kept, k), k};
    detail::check_weibull_params(params);
    return params;
}

/// GGD ML fit following the standard subband-modeling procedure: the shape
/// beta solves
///   1 + psi(1/b)/b - sum(|x|^b ln|x|)/sum(|x|^b) + ln((b/N) sum(|x|^b))/b = 0
/// (psi = digamma) by safeguarded Newton-Raphson to |residual| <= 1e-9; the
/// scale follows in closed form: alpha = ((beta/N) sum |x|^beta)^(1/beta).
inline GgdParams ggd_fit(std::span<const double> samples) {
    if (samples.size() < 16)
        throw std::runtime_error("ggd_fit: too few samples");
    double max_abs = 0.0;
    for (double x : samples) {
        if (!std::isfinite(x))
            throw std::invalid_argument("ggd_fit: samples must be finite");
        max_abs = std::max(max_abs, std::abs(x));
    }
    if (max_abs == 0.0)
        throw std::runtime_error("ggd_fit: degenerate sample");
    std::vector<double> log_y;  // ln(|x|/max), zeros dropped (their ML weight is zero)
    log_y.reserve(samples.size());
    for (double x : samples)
        if (x != 0.0) log_y.push_back(std::log(std::abs(x) / max_abs));
    bool distinct = false;
    for (double ly : log_y)
        if (ly != 0.0) {
            distinct = true;
            break;
        }
    if (!distinct)
        throw std::runtime_error("ggd_fit: degenerate sample");

    const double n = static_cast<double>(samples.size());
    auto eval = [&](double b, double& g, double& dg) {
        double s = 0.0, t = 0.0, u = 0.0;
        for (double ly : log_y) {
            const double w = std::exp(b * ly);
            s += w;
            t += w * ly;
            u += w * ly * ly;
        }
        const double inv_b = 1.0 / b;
        const double psi = boost::math::digamma(inv_b);
        const double wmean = t / s;
        const double log_term = std::log(b * s / n);
        g = 1.0 + psi * inv_b - wmean + log_term * inv_b;
        const double psi1 = boost::math::trigamma(inv_b);
        const double lprime = inv_b + wmean;
        dg = -(psi1 * inv_b + psi) * inv_b * inv_b + (lprime * b - log_term) * inv_b * inv_b -
             (u / s - wmean * wmean);
    };

    // Bracket the root by geometric scan, then refine.
    double lo = 0.0, hi = 0.0, g_lo = 0.0;
    double prev_b = 0.05, prev_g, unused;
    eval(prev_b, prev_g, unused);
    for (double b = 0.1; b <= 205.0; b *= 2.0) {
        double g, dg;
        eval(b, g, dg);
        if ((prev_g <= 0.0) != (g <= 0.0)) {
            lo = prev_b;
            hi = b;
            g_lo = prev_g;
            break;
        }
        prev_b = b;
        prev_g = g;
    }
    if (hi == 0.0)
        throw std::runtime_error("ggd_fit: shape equation has no bracketed root");

    double b = 0.5 * (lo + hi);
    bool converged = false;
    for (int iter = 0; iter < 100; ++iter) {
        double g, dg;
        eval(b, g, dg);
        if (std::abs(g) <= 1e-9) {
            converged = true;
            break;
        }
        if ((g <= 0.0) == (g_lo <= 0.0)) {
            lo = b;
            g_lo = g;
        } else {
            hi = b;
        }
        double next = b - g / dg;
        if (!std::isfinite(next) || next <= lo || next >= hi) next = 0.5 * (lo + hi);
        b = next;
    }
    if (!converged)
        throw std::runtime_error("ggd_fit: shape equation did not converge");

    double s = 0.0;
    for (double ly : log_y) s += std::exp(b * ly);
    const double alpha = max_abs * std::pow(b * s / n, 1.0 / b);
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw std::runtime_error("ggd_fit: scale estimate is not finite");
    return GgdParams{alpha, b};
}

/// Fits a Weibull model to every layer >= 1 subband of a scattering
/// representation, in canonical order. Samples at or below 1e-12 times the
/// subband maximum are discarded before fitting. The layer-0 subband carries
/// no modulus statistics and is excluded.
inline Signature fit_signature(const ScatteringRep& rep) {
    if (rep.subbands.empty())
        throw std::invalid_argument("fit_signature: empty representation");
    Signature sig;
    sig.method = rep.normalized ? Method::NwstWeibull : Method::WstWeibull;
    sig.config = SigConfig{static_cast<std::uint16_t>(rep.scales),
                           static_cast<std::uint16_t>(rep.rotations),
                           static_cast<std::uint16_t>(rep.max_layer), rep.normalized,
                           rep.normalized ? rep.epsilon_rel : 0.0};
    for (const auto& sb : rep.subbands) {
        if (sb.path.layer() == 0) continue;
        const double peak = *std::max_element(sb.grid.samples.begin(), sb.grid.samples.end());
        try {
            if (!(peak > 0.0))
                throw std::runtime_error("weibull_fit: degenerate sample");
            const WeibullParams p = weibull_fit(sb.grid.samples, 1e-12 * peak);
            sig.entries.push_back({sb.path.label(), p.lambda, p.k});
        } catch (const std::exception& e) {
            throw std::runtime_error("subband '" + sb.path.label() + "': " + e.what());
        }
    }
    return sig;
}

/// Fits a GGD model to every detail subband of a DWT pyramid, in canonical
/// order (level-major, then horizontal/vertical/diagonal).
inline Signature fit_signature(const DwtPyramid& pyramid) {
    if (pyramid.details.empty())
        throw std::invalid_argument("fit_signature: empty pyramid");
    Signature sig;
    sig.method = Method::FwtGgd;
    sig.config = SigConfig{0, 0, static_cast<std::uint16_t>(pyramid.levels), false, 0.0};
    for (int level = 1; level <= pyramid.levels; ++level) {
        for (auto o : {DwtOrientation::Horizontal, DwtOrientation::Vertical, DwtOrientation::Diagonal}) {
            const std::string label =
                "l" + std::to_string(level) + ":" + dwt_orientation_name(o);
            try {
                const GgdParams p = ggd_fit(pyramid.detail(level, o).samples);
                sig.entries.push_back({label, p.alpha, p.beta});
            } catch (const std::exception& e) {
                throw std::runtime_error("subband '" + label + "': " + e.what());
            }
        }
    }
    return sig;
}

}  // namespace scatret
