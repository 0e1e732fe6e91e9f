#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "scatret/image.hpp"

namespace scatret {

/// Tunable parameters of the Morlet/Gaussian filterbank. Spatial standard
/// deviations refer to the mother (finest-scale) window; scale j dilates by
/// 2^j. The defaults give half-power crossings between adjacent scales
/// (bandwidth 4*sqrt(ln 2)/pi) and between adjacent orientations of the
/// canonical L = 4 geometry (slant 0.8712).
struct MorletParams {
    double center_freq = 3.0 * std::numbers::pi / 4.0;  ///< modulation frequency of the mother wavelet
    double bandwidth_factor = 1.0599;  ///< spatial std of the mother Gaussian window
    double slant = 0.8712;             ///< anisotropy; <1 widens the angular footprint
    double lowpass_factor = 0.26;      ///< scaling-filter spatial std per unit scale (phi_J std = factor * 2^J)
    double blur_bins = 1.0;            ///< blur-filter frequency std in DFT bins (lowest-bin neighborhood)
};

/// Frequency-domain filter set for a fixed grid size and (J, L): J*L Morlet
/// band-pass responses, the Gaussian scaling filter phi_J (DC gain 1), and a
/// very narrow-band blur filter used by the normalized transform. Responses
/// are real-valued and stored in standard DFT layout (DC at index 0).
struct FilterBank {
    int width = 0;
    int height = 0;
    int scales = 0;     // J
    int rotations = 0;  // L
    MorletParams params;
    std::vector<std::vector<double>> bandpass;  // index j * rotations + r
    std::vector<double> lowpass;
    std::vector<double> blur;

    const std::vector<double>& band(int j, int r) const {
        if (j < 0 || j >= scales || r < 0 || r >= rotations)
            throw std::invalid_argument("FilterBank::band: index out of range");
        return bandpass[static_cast<std::size_t>(j) * rotations + r];
    }
};

namespace detail {

// Signed DFT frequency of bin k on an n-point grid, in radians/sample.
inline double bin_freq(int k, int n) {
    const int s = (k < n / 2 + n % 2) ? k : k - n;
    return 2.0 * std::numbers::pi * s / n;
}

// Anisotropic Gaussian window spectrum, periodized over the 2pi x 2pi
// frequency torus (one ring of aliases is enough for the decay involved).
// sigma_par / sigma_perp are the *spatial* stds along / across `theta`.
inline double gauss_spectrum_periodized(double wx, double wy, double cx, double cy, double cos_t,
                                        double sin_t, double sigma_par, double sigma_perp) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double acc = 0.0;
    for (int mx = -1; mx <= 1; ++mx)
        for (int my = -1; my <= 1; ++my) {
            const double ux = wx + two_pi * mx - cx;
            const double uy = wy + two_pi * my - cy;
            const double upar = ux * cos_t + uy * sin_t;
            const double uperp = -ux * sin_t + uy * cos_t;
            acc += std::exp(-0.5 * (sigma_par * sigma_par * upar * upar +
                                    sigma_perp * sigma_perp * uperp * uperp));
        }
    return acc;
}

}  // namespace detail

/// Builds the Morlet filterbank for a width x height grid. The mother wavelet
/// is a Gaussian window modulated to `center_freq` along orientation r*pi/L
/// with the DC-cancelling correction term; scale j dilates the mother by 2^j
/// and periodizes it over the frequency torus of the grid, so each scale's
/// discrete response is the exact sampling of its own dilated kernel. With
/// center_freq = 3pi/4 the mother straddles Nyquist, so the finest scale
/// keeps a physical wrap-around tail; coarser scales are alias-clean and
/// exactly self-similar. Band-pass gains are normalized so the symmetrized
/// Littlewood-Paley sum never exceeds 1.
inline FilterBank build_morlet_bank(int width, int height, int scales, int rotations,
                                    const MorletParams& params = {}) {
    if (scales < 1 || rotations < 1)
        throw std::invalid_argument("build_morlet_bank: J and L must be >= 1");
    if (width < (1 << scales) || height < (1 << scales))
        throw std::invalid_argument("build_morlet_bank: grid smaller than 2^J");
    if (params.center_freq <= 0 || params.bandwidth_factor <= 0 || params.slant <= 0 ||
        params.lowpass_factor <= 0 || params.blur_bins <= 0)
        throw std::invalid_argument("build_morlet_bank: parameters must be positive");

    FilterBank bank;
    bank.width = width;
    bank.height = height;
    bank.scales = scales;
    bank.rotations = rotations;
    bank.params = params;

    const std::size_t n = static_cast<std::size_t>(width) * height;
    const double sigma = params.bandwidth_factor;
    const double sigma_perp = sigma * params.slant;

    bank.bandpass.assign(static_cast<std::size_t>(scales) * rotations,
                         std::vector<double>(n, 0.0));
    for (int r = 0; r < rotations; ++r) {
        const double theta = std::numbers::pi * r / rotations;
        const double cos_t = std::cos(theta), sin_t = std::sin(theta);
        const double cx = params.center_freq * cos_t;
        const double cy = params.center_freq * sin_t;
        for (int j = 0; j < scales; ++j) {
            auto& filt = bank.bandpass[static_cast<std::size_t>(j) * rotations + r];
            const double dilation = static_cast<double>(1 << j);
            // Aliases of the dilated kernel sit 2^j * 2pi apart; evaluate the
            // dilated argument so the periodization matches each scale.
            auto dilated = [&](double wx, double wy, double ccx, double ccy) {
                constexpr double two_pi = 2.0 * std::numbers::pi;
                double acc = 0.0;
                for (int mx = -1; mx <= 1; ++mx)
                    for (int my = -1; my <= 1; ++my) {
                        const double ux = dilation * (wx + two_pi * mx) - ccx;
                        const double uy = dilation * (wy + two_pi * my) - ccy;
                        const double upar = ux * cos_t + uy * sin_t;
                        const double uperp = -ux * sin_t + uy * cos_t;
                        acc += std::exp(-0.5 * (sigma * sigma * upar * upar +
                                                sigma_perp * sigma_perp * uperp * uperp));
                    }
                return acc;
            };
            // DC correction per scale: the response vanishes exactly at 0.
            const double beta = dilated(0.0, 0.0, cx, cy) / dilated(0.0, 0.0, 0.0, 0.0);
            for (int ky = 0; ky < height; ++ky) {
                const double wy = detail::bin_freq(ky, height);
                for (int kx = 0; kx < width; ++kx) {
                    const double wx = detail::bin_freq(kx, width);
                    filt[static_cast<std::size_t>(ky) * width + kx] =
                        dilated(wx, wy, cx, cy) - beta * dilated(wx, wy, 0.0, 0.0);
                }
            }
        }
    }

    // Scaling filter phi_J, normalized to unit DC gain.
    bank.lowpass.assign(n, 0.0);
    const double sigma_phi = params.lowpass_factor * static_cast<double>(1 << scales);
    const double phi_dc =
        detail::gauss_spectrum_periodized(0.0, 0.0, 0.0, 0.0, 1.0, 0.0, sigma_phi, sigma_phi);
    for (int ky = 0; ky < height; ++ky) {
        const double wy = detail::bin_freq(ky, height);
        for (int kx = 0; kx < width; ++kx) {
            const double wx = detail::bin_freq(kx, width);
            bank.lowpass[static_cast<std::size_t>(ky) * width + kx] =
                detail::gauss_spectrum_periodized(wx, wy, 0.0, 0.0, 1.0, 0.0, sigma_phi, sigma_phi) /
                phi_dc;
        }
    }

    // Blur filter: Gaussian over the lowest-frequency bin neighborhood.
    bank.blur.assign(n, 0.0);
    const double bx = params.blur_bins * 2.0 * std::numbers::pi / width;
    const double by = params.blur_bins * 2.0 * std::numbers::pi / height;
    for (int ky = 0; ky < height; ++ky) {
        const double wy = detail::bin_freq(ky, height);
        for (int kx = 0; kx < width; ++kx) {
            const double wx = detail::bin_freq(kx, width);
            bank.blur[static_cast<std::size_t>(ky) * width + kx] =
                std::exp(-0.5 * (wx * wx / (bx * bx) + wy * wy / (by * by)));
        }
    }

    // Global band-pass gain: the largest c with
    //   |phi_J|^2 + c^2 * (1/2) sum_{j,r} (|psi(w)|^2 + |psi(-w)|^2) <= 1
    // pointwise. The 1/2 accounts for the one-sided (half-plane) filters.
    std::vector<double> bp_sym(n, 0.0);
    for (const auto& filt : bank.bandpass)
        for (std::size_t i = 0; i < n; ++i) bp_sym[i] += filt[i] * filt[i];
    auto mirror_index = [&](std::size_t i) {
        const int ky = static_cast<int>(i) / width;
        const int kx = static_cast<int>(i) % width;
        const int mky = (height - ky) % height;
        const int mkx = (width - kx) % width;
        return static_cast<std::size_t>(mky) * width + mkx;
    };
    double c2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double sym = 0.5 * (bp_sym[i] + bp_sym[mirror_index(i)]);
        if (sym <= 1e-12) continue;
        const double phi2 = bank.lowpass[i] * bank.lowpass[i];
        c2 = std::min(c2, (1.0 - phi2) / sym);
    }
    double gain = std::sqrt(c2);
    double peak = 0.0;
    for (const auto& filt : bank.bandpass)
        for (double v : filt) peak = std::max(peak, std::abs(v));
    gain = std::min(gain, 1.0 / peak);  // keep every response magnitude <= 1
    for (auto& filt : bank.bandpass)
        for (double& v : filt) v *= gain;

    return bank;
}

/// Pointwise Littlewood-Paley energy sum of a bank and its maximum absolute
/// deviation from 1 over the annulus pi/2^J <= |omega| <= pi. The band-pass
/// terms are symmetrized over +/-omega, matching the half-plane filter
/// convention absorbed into the band-pass normalization.
struct LittlewoodPaley {
    ImageGrid sum;
    double max_deviation = 0.0;
};

inline LittlewoodPaley littlewood_paley(const FilterBank& bank) {
    const int width = bank.width, height = bank.height;
    const std::size_t n = static_cast<std::size_t>(width) * height;
    std::vector<double> bp(n, 0.0);
    for (const auto& filt : bank.bandpass)
        for (std::size_t i = 0; i < n; ++i) bp[i] += filt[i] * filt[i];

    LittlewoodPaley result;
    result.sum = ImageGrid(width, height);
    const double inner = std::numbers::pi / static_cast<double>(1 << bank.scales);
    for (int ky = 0; ky < height; ++ky) {
        const int mky = (height - ky) % height;
        for (int kx = 0; kx < width; ++kx) {
            const int mkx = (width - kx) % width;
            const std::size_t i = static_cast<std::size_t>(ky) * width + kx;
            const std::size_t mi = static_cast<std::size_t>(mky) * width + mkx;
            const double phi = bank.lowpass[i];
            const double value = phi * phi + 0.5 * (bp[i] + bp[mi]);
            result.sum.samples[i] = value;
            const double wx = detail::bin_freq(kx, width);
            const double wy = detail::bin_freq(ky, height);
            const double mag = std::hypot(wx, wy);
            if (mag >= inner && mag <= std::numbers::pi)
                result.max_deviation = std::max(result.max_deviation, std::abs(value - 1.0));
        }
    }
    return result;
}

}  // namespace scatret
