#pragma once

#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "scatret/image.hpp"

namespace scatret {

enum class DwtOrientation { Horizontal = 0, Vertical = 1, Diagonal = 2 };

inline const char* dwt_orientation_name(DwtOrientation o) {
    switch (o) {
        case DwtOrientation::Horizontal: return "h";
        case DwtOrientation::Vertical: return "v";
        case DwtOrientation::Diagonal: return "d";
    }
    return "?";
}

/// Mallat pyramid of a separable 2D DWT: 3 detail subbands per level plus
/// the coarsest approximation. Level-l details have dimensions input / 2^l.
struct DwtPyramid {
    int levels = 0;
    std::map<std::pair<int, DwtOrientation>, ImageGrid> details;
    ImageGrid approx;

    const ImageGrid& detail(int level, DwtOrientation o) const { return details.at({level, o}); }
};

namespace detail {

// Orthonormal Daubechies 4-tap analysis pair; g is the quadrature mirror of h.
inline const std::array<double, 4>& db2_lowpass() {
    static const std::array<double, 4> h = {
        (1.0 + std::sqrt(3.0)) / (4.0 * std::sqrt(2.0)),
        (3.0 + std::sqrt(3.0)) / (4.0 * std::sqrt(2.0)),
        (3.0 - std::sqrt(3.0)) / (4.0 * std::sqrt(2.0)),
        (1.0 - std::sqrt(3.0)) / (4.0 * std::sqrt(2.0))};
    return h;
}

inline const std::array<double, 4>& db2_highpass() {
    static const std::array<double, 4> g = [] {
        const auto& h = db2_lowpass();
        std::array<double, 4> out{};
        for (int k = 0; k < 4; ++k) out[k] = (k % 2 == 0 ? 1.0 : -1.0) * h[3 - k];
        return out;
    }();
    return g;
}

// One periodic analysis step along a strided 1D slice of length n (n even).
inline void analyze_1d(const double* x, int n, int stride, double* approx, double* detail_out) {
    const auto& h = db2_lowpass();
    const auto& g = db2_highpass();
    const int half = n / 2;
    for (int i = 0; i < half; ++i) {
        double a = 0.0, d = 0.0;
        for (int k = 0; k < 4; ++k) {
            const double v = x[((2 * i + k) % n) * static_cast<std::size_t>(stride)];
            a += h[k] * v;
            d += g[k] * v;
        }
        approx[i] = a;
        detail_out[i] = d;
    }
}

// Periodic synthesis: adjoint of analyze_1d (the filters are orthonormal).
inline void synthesize_1d(const double* approx, const double* detail_in, int half, int stride,
                          double* x) {
    const auto& h = db2_lowpass();
    const auto& g = db2_highpass();
    const int n = 2 * half;
    for (int i = 0; i < n; ++i) x[i * static_cast<std::size_t>(stride)] = 0.0;
    for (int i = 0; i < half; ++i)
        for (int k = 0; k < 4; ++k)
            x[((2 * i + k) % n) * static_cast<std::size_t>(stride)] +=
                h[k] * approx[i] + g[k] * detail_in[i];
}

}  // namespace detail

/// 2D discrete wavelet pyramid with the Daubechies 4-tap pair and periodic
/// boundary extension. Rows are split first, then columns; orientation names
/// follow the frequency content: Vertical = detail along x, Horizontal =
/// detail along y, Diagonal = both.
inline DwtPyramid dwt2(const ImageGrid& image, int levels) {
    if (levels < 1)
        throw std::invalid_argument("dwt2: levels must be >= 1");
    const int div = 1 << levels;
    if (image.width % div != 0 || image.height % div != 0)
        throw std::invalid_argument("dwt2: image dimensions must be divisible by 2^levels");

    DwtPyramid pyr;
    pyr.levels = levels;
    ImageGrid current = image;
    for (int level = 1; level <= levels; ++level) {
        const int w = current.width, h = current.height;
        const int hw = w / 2, hh = h / 2;
        // Rows: [L | H] halves.
        ImageGrid rowpass(w, h);
        std::vector<double> a(hw), d(hw);
        for (int r = 0; r < h; ++r) {
            detail::analyze_1d(&current.samples[static_cast<std::size_t>(r) * w], w, 1, a.data(), d.data());
            for (int c = 0; c < hw; ++c) {
                rowpass.at(r, c) = a[c];
                rowpass.at(r, hw + c) = d[c];
            }
        }
        // Columns of each half.
        ImageGrid ll(hw, hh), lh(hw, hh), hl(hw, hh), hh_band(hw, hh);
        std::vector<double> ca(hh), cd(hh);
        for (int c = 0; c < hw; ++c) {
            detail::analyze_1d(&rowpass.samples[c], h, w, ca.data(), cd.data());
            for (int r = 0; r < hh; ++r) {
                ll.at(r, c) = ca[r];
                lh.at(r, c) = cd[r];
            }
            detail::analyze_1d(&rowpass.samples[hw + c], h, w, ca.data(), cd.data());
            for (int r = 0; r < hh; ++r) {
                hl.at(r, c) = ca[r];
                hh_band.at(r, c) = cd[r];
            }
        }
        pyr.details.emplace(std::make_pair(level, DwtOrientation::Horizontal), std::move(lh));
        pyr.details.emplace(std::make_pair(level, DwtOrientation::Vertical), std::move(hl));
        pyr.details.emplace(std::make_pair(level, DwtOrientation::Diagonal), std::move(hh_band));
        current = std::move(ll);
    }
    pyr.approx = std::move(current);
    return pyr;
}

/// Inverts dwt2 exactly (orthonormal filters, periodic extension).
inline ImageGrid idwt2(const DwtPyramid& pyramid) {
    if (pyramid.levels < 1 || pyramid.approx.size() == 0)
        throw std::invalid_argument("idwt2: empty pyramid");
    ImageGrid current = pyramid.approx;
    for (int level = pyramid.levels; level >= 1; --level) {
        auto it_h = pyramid.details.find({level, DwtOrientation::Horizontal});
        auto it_v = pyramid.details.find({level, DwtOrientation::Vertical});
        auto it_d = pyramid.details.find({level, DwtOrientation::Diagonal});
        if (it_h == pyramid.details.end() || it_v == pyramid.details.end() ||
            it_d == pyramid.details.end())
            throw std::invalid_argument("idwt2: missing detail subband");
        const ImageGrid& lh = it_h->second;
        const ImageGrid& hl = it_v->second;
        const ImageGrid& hh_band = it_d->second;
        const int hw = current.width, hh = current.height;
        if (lh.width != hw || lh.height != hh || hl.width != hw || hl.height != hh ||
            hh_band.width != hw || hh_band.height != hh)
            throw std::invalid_argument("idwt2: inconsistent subband dimensions");
        const int w = 2 * hw, h = 2 * hh;
        // Columns first (adjoint order of the analysis).
        ImageGrid rowpass(w, h);
        std::vector<double> col(h);
        for (int c = 0; c < hw; ++c) {
            std::vector<double> ca(hh), cd(hh);
            for (int r = 0; r < hh; ++r) {
                ca[r] = current.at(r, c);
                cd[r] = lh.at(r, c);
            }
            detail::synthesize_1d(ca.data(), cd.data(), hh, 1, col.data());
            for (int r = 0; r < h; ++r) rowpass.at(r, c) = col[r];
            for (int r = 0; r < hh; ++r) {
                ca[r] = hl.at(r, c);
                cd[r] = hh_band.at(r, c);
            }
            detail::synthesize_1d(ca.data(), cd.data(), hh, 1, col.data());
            for (int r = 0; r < h; ++r) rowpass.at(r, hw + c) = col[r];
        }
        ImageGrid next(w, h);
        std::vector<double> ra(hw), rd(hw);
        for (int r = 0; r < h; ++r) {
            for (int c = 0; c < hw; ++c) {
                ra[c] = rowpass.at(r, c);
                rd[c] = rowpass.at(r, hw + c);
            }
            detail::synthesize_1d(ra.data(), rd.data(), hw, 1,
                                  &next.samples[static_cast<std::size_t>(r) * w]);
        }
        current = std::move(next);
    }
    return current;
}

}  // namespace scatret
