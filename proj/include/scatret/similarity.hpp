#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "scatret/signature.hpp"
#include "scatret/statmodel.hpp"

namespace scatret {

namespace detail {

// ln(cosh(t)) without overflow for any finite t.
inline double log_cosh(double t) {
    const double a = std::abs(t);
    return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

}  // namespace detail

/// -ln of the Weibull similarity kernel, evaluated fully in log space:
/// with k = (k1+k2)/2, the kernel is the product of the mean-ratio factors
/// mu_g/mu_a of (lambda1^k, lambda2^k) and of (k1, k2), and each factor
/// equals 1/cosh of half the log difference. Always finite for valid
/// parameters, no matter how far apart the distributions are.
inline double weibull_kernel_neg_log(const WeibullParams& p1, const WeibullParams& p2) {
    detail::check_weibull_params(p1);
    detail::check_weibull_params(p2);
    const double k_mean = 0.5 * (p1.k + p2.k);
    const double t_scale = 0.5 * k_mean * (std::log(p1.lambda) - std::log(p2.lambda));
    const double t_shape = 0.5 * (std::log(p1.k) - std::log(p2.k));
    return detail::log_cosh(t_scale) + detail::log_cosh(t_shape);
}

/// Weibull similarity kernel in (0, 1]; symmetric, and exactly 1 iff the
/// parameter pairs coincide.
inline double weibull_kernel(const WeibullParams& p1, const WeibullParams& p2) {
    return std::exp(-weibull_kernel_neg_log(p1, p2));
}

/// Metric induced by the kernel: d = sqrt(2 - 2K).
inline double weibull_kernel_distance(const WeibullParams& p1, const WeibullParams& p2) {
    return std::sqrt(std::max(0.0, 2.0 - 2.0 * weibull_kernel(p1, p2)));
}

/// Bhattacharyya coefficient of two densities by adaptive quadrature over
/// [lo, hi], to absolute tolerance 1e-10. Serves as the numerical oracle for
/// the closed-form kernel.
template <typename Pdf1, typename Pdf2>
double bc_numeric(Pdf1&& p, Pdf2&& q, double lo, double hi) {
    if (!(lo < hi))
        throw std::invalid_argument("bc_numeric: empty support interval");
    boost::math::quadrature::tanh_sinh<double> integrator;
    double error = 0.0, l1 = 0.0;
    std::size_t levels = 0;
    const double value = integrator.integrate(
        [&](double x) {
            const double prod = p(x) * q(x);
            return prod > 0.0 ? std::sqrt(prod) : 0.0;
        },
        lo, hi, 1e-12, &error, &l1, &levels);
    if (!std::isfinite(value) || error * l1 > 1e-10)
        throw std::runtime_error("bc_numeric: quadrature did not converge");
    return value;
}

/// Multi-subband scattering similarity: the negative log of the product of
/// per-subband Weibull kernels. Nonnegative, symmetric, zero exactly on
/// identical signatures.
inline double sm_scat(const Signature& s1, const Signature& s2) {
    if (!same_config(s1, s2))
        throw std::invalid_argument("sm_scat: signature config mismatch");
    if (s1.method == Method::FwtGgd)
        throw std::invalid_argument("sm_scat: requires Weibull signatures");
    if (s1.entries.size() != s2.entries.size())
        throw std::invalid_argument("sm_scat: subband-count mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < s1.entries.size(); ++i)
        total += weibull_kernel_neg_log(WeibullParams{s1.entries[i].p1, s1.entries[i].p2},
                                        WeibullParams{s2.entries[i].p1, s2.entries[i].p2});
    return total;
}

/// Cross-entropy between two GGDs:
/// ln(2 a2 / b2) + ln Gamma(1/b2) + (a1/a2)^b2 * Gamma((b2+1)/b1) / Gamma(1/b1).
/// Gamma ratios are evaluated through lgamma to avoid overflow.
inline double ggd_cross_entropy(const GgdParams& p1, const GgdParams& p2) {
    if (!(p1.alpha > 0.0) || !(p1.beta > 0.0) || !(p2.alpha > 0.0) || !(p2.beta > 0.0))
        throw std::invalid_argument("ggd_cross_entropy: parameters must be positive");
    const double log_ratio_term = p2.beta * (std::log(p1.alpha) - std::log(p2.alpha)) +
                                  std::lgamma((p2.beta + 1.0) / p1.beta) -
                                  std::lgamma(1.0 / p1.beta);
    const double result = std::log(2.0 * p2.alpha / p2.beta) + std::lgamma(1.0 / p2.beta) +
                          std::exp(log_ratio_term);
    if (!std::isfinite(result))
        throw std::runtime_error("ggd_cross_entropy: value overflowed");
    return result;
}

/// Summed per-subband Kullback-Leibler divergence between two GGD
/// signatures: sum_i [H(p1_i, p2_i) - H(p1_i, p1_i)].
inline double ggd_kld_sm(const Signature& s1, const Signature& s2) {
    if (!same_config(s1, s2))
        throw std::invalid_argument("ggd_kld_sm: signature config mismatch");
    if (s1.method != Method::FwtGgd)
        throw std::invalid_argument("ggd_kld_sm: requires GGD signatures");
    if (s1.entries.size() != s2.entries.size())
        throw std::invalid_argument("ggd_kld_sm: subband-count mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < s1.entries.size(); ++i) {
        const GgdParams a{s1.entries[i].p1, s1.entries[i].p2};
        const GgdParams b{s2.entries[i].p1, s2.entries[i].p2};
        total += ggd_cross_entropy(a, b) - ggd_cross_entropy(a, a);
    }
    return total;
}

/// Similarity between two signatures of the same method: sm_scat for Weibull
/// methods, summed KLD for the GGD baseline. Smaller = more similar.
inline double signature_similarity(const Signature& s1, const Signature& s2) {
    return s1.method == Method::FwtGgd ? ggd_kld_sm(s1, s2) : sm_scat(s1, s2);
}

}  // namespace scatret
