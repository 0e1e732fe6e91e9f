#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "scatret/fft.hpp"
#include "scatret/filterbank.hpp"
#include "scatret/image.hpp"
#include "scatret/path.hpp"
#include "scatret/serial.hpp"

namespace scatret {

/// One output node of the scattering tree.
struct Subband {
    Path path;
    ImageGrid grid;
};

/// Finite-path scattering representation: every admissible path of layer
/// 0..max_layer mapped to its critically sampled subband, in canonical order
/// (layer-major, then lexicographic in the steps).
struct ScatteringRep {
    int scales = 0;     // J
    int rotations = 0;  // L
    int max_layer = 0;  // M
    bool normalized = false;
    double epsilon_rel = 0.0;
    int oversampling = 1;  // power of two; 1 = critical sampling
    int input_width = 0;
    int input_height = 0;
    std::vector<Subband> subbands;

    const Subband* find(const Path& p) const {
        for (const auto& sb : subbands)
            if (sb.path == p) return &sb;
        return nullptr;
    }
};

namespace detail {

inline int log2_exact(int value) {
    int log = 0;
    while ((1 << log) < value) ++log;
    if ((1 << log) != value) return -1;
    return log;
}

inline int resolution_of(const FilterBank& bank, const ImageGrid& signal) {
    if (signal.width <= 0 || bank.width % signal.width != 0 ||
        bank.height % signal.height != 0)
        throw std::invalid_argument("scattering: signal dimensions do not match the filterbank");
    const int rx = log2_exact(bank.width / signal.width);
    const int ry = log2_exact(bank.height / signal.height);
    if (rx < 0 || ry < 0 || rx != ry)
        throw std::invalid_argument("scattering: signal dimensions do not match the filterbank");
    return rx;
}

// Restricts a full-grid frequency response to the center band of a signal
// held at resolution `res` (grid smaller by 2^res per axis). Standard DFT
// layout: low frequencies live in the corner blocks.
inline std::vector<double> restrict_filter(const std::vector<double>& full, int full_width,
                                           int full_height, int res) {
    const int w = full_width >> res, h = full_height >> res;
    std::vector<double> out(static_cast<std::size_t>(w) * h);
    for (int ky = 0; ky < h; ++ky) {
        const int src_y = ky < (h + 1) / 2 ? ky : full_height - (h - ky);
        for (int kx = 0; kx < w; ++kx) {
            const int src_x = kx < (w + 1) / 2 ? kx : full_width - (w - kx);
            out[static_cast<std::size_t>(ky) * w + kx] =
                full[static_cast<std::size_t>(src_y) * full_width + src_x];
        }
    }
    return out;
}

// Multiplies a spectrum by a (restricted) filter, folds the product down to
// the target resolution, and returns the small-grid complex signal. Folding
// the product is exact spatial subsampling of the periodic convolution.
inline std::vector<std::complex<double>> conv_subsample(
    const std::vector<std::complex<double>>& spectrum, int w, int h,
    const std::vector<double>& filter_at_res, int fold) {
    std::vector<std::complex<double>> product(spectrum.size());
    for (std::size_t i = 0; i < spectrum.size(); ++i) product[i] = spectrum[i] * filter_at_res[i];
    const int tw = w >> fold, th = h >> fold;
    std::vector<std::complex<double>> folded(static_cast<std::size_t>(tw) * th, 0.0);
    for (int ky = 0; ky < h; ++ky) {
        const int oy = ky % th;
        for (int kx = 0; kx < w; ++kx)
            folded[static_cast<std::size_t>(oy) * tw + kx % tw] +=
                product[static_cast<std::size_t>(ky) * w + kx];
    }
    fft::inverse(th, tw, folded.data());
    const double scale = 1.0 / (static_cast<double>(w) * h);
    for (auto& v : folded) v *= scale;
    return folded;
}

inline std::vector<std::complex<double>> spectrum_of(const ImageGrid& signal) {
    std::vector<std::complex<double>> spec(signal.size());
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] = signal.samples[i];
    fft::forward(signal.height, signal.width, spec.data());
    return spec;
}

inline ImageGrid modulus_grid(const std::vector<std::complex<double>>& values, int w, int h) {
    ImageGrid out(w, h);
    for (std::size_t i = 0; i < values.size(); ++i) out.samples[i] = std::abs(values[i]);
    return out;
}

inline ImageGrid real_grid(const std::vector<std::complex<double>>& values, int w, int h,
                           bool clamp_nonnegative) {
    ImageGrid out(w, h);
    for (std::size_t i = 0; i < values.size(); ++i) {
        double v = values[i].real();
        if (clamp_nonnegative && v < 0.0) v = 0.0;
        out.samples[i] = v;
    }
    return out;
}

// Band-limited resampling between grid sizes via frequency-domain zero
// padding (upsampling) or center-band truncation (downsampling).
inline ImageGrid resample(const ImageGrid& signal, int new_width, int new_height) {
    if (new_width == signal.width && new_height == signal.height) return signal;
    auto spec = spectrum_of(signal);
    std::vector<std::complex<double>> out_spec(static_cast<std::size_t>(new_width) * new_height,
                                               0.0);
    const int cw = std::min(signal.width, new_width);
    const int ch = std::min(signal.height, new_height);
    for (int ky = 0; ky < ch; ++ky) {
        const int sy = ky < (ch + 1) / 2 ? ky : signal.height - (ch - ky);
        const int dy = ky < (ch + 1) / 2 ? ky : new_height - (ch - ky);
        for (int kx = 0; kx < cw; ++kx) {
            const int sx = kx < (cw + 1) / 2 ? kx : signal.width - (cw - kx);
            const int dx = kx < (cw + 1) / 2 ? kx : new_width - (cw - kx);
            out_spec[static_cast<std::size_t>(dy) * new_width + dx] =
                spec[static_cast<std::size_t>(sy) * signal.width + sx];
        }
    }
    fft::inverse(new_height, new_width, out_spec.data());
    ImageGrid out(new_width, new_height);
    const double scale = 1.0 / (static_cast<double>(signal.width) * signal.height);
    for (std::size_t i = 0; i < out.size(); ++i) out.samples[i] = out_spec[i].real() * scale;
    return out;
}

}  // namespace detail

/// One propagation step: band-pass moduli |psi_{j,r} * signal| for all scales
/// j >= j_min, each held at sampling rate 2^j relative to the bank's grid,
/// plus the scaling-filter output at the 2^J rate. The signal may already be
/// subsampled (its resolution is inferred from its dimensions); filters are
/// applied on its center frequency band.
struct Propagated {
    std::map<PathStep, ImageGrid> moduli;
    ImageGrid lowpass;
};

inline Propagated propagate(const ImageGrid& signal, const FilterBank& bank, int j_min,
                            int oversampling = 1) {
    const int res = detail::resolution_of(bank, signal);
    const int os_log = detail::log2_exact(oversampling);
    if (os_log < 0)
        throw std::invalid_argument("propagate: oversampling must be a power of two");
    const auto spectrum = detail::spectrum_of(signal);

    Propagated out;
    for (int j = std::max(j_min, res); j < bank.scales; ++j) {
        const int target = std::max(res, j - os_log);
        for (int r = 0; r < bank.rotations; ++r) {
            auto filt = detail::restrict_filter(bank.band(j, r), bank.width, bank.height, res);
            auto values =
                detail::conv_subsample(spectrum, signal.width, signal.height, filt, target - res);
            out.moduli.emplace(
                PathStep{static_cast<std::uint16_t>(j), static_cast<std::uint16_t>(r)},
                detail::modulus_grid(values, signal.width >> (target - res),
                                     signal.height >> (target - res)));
        }
    }
    const int lp_target = std::max(res, bank.scales - os_log);
    auto lp_filter = detail::restrict_filter(bank.lowpass, bank.width, bank.height, res);
    auto lp_values =
        detail::conv_subsample(spectrum, signal.width, signal.height, lp_filter, lp_target - res);
    out.lowpass = detail::real_grid(lp_values, signal.width >> (lp_target - res),
                                    signal.height >> (lp_target - res), false);
    return out;
}

/// Finite-path windowed scattering transform: the lowpass outputs of every
/// admissible path of layer 0..max_layer (scale indices strictly increasing
/// along each path), critically sampled. Layer >= 1 subbands are clamped at
/// zero; they are lowpass outputs of moduli and nonnegative up to rounding.
inline ScatteringRep wst(const ImageGrid& image, const FilterBank& bank, int max_layer,
                         int oversampling = 1) {
    if (max_layer < 0)
        throw std::invalid_argument("wst: max_layer must be >= 0");
    if (image.width != bank.width || image.height != bank.height)
        throw std::invalid_argument("wst: image dimensions do not match the filterbank");
    const int os_log = detail::log2_exact(oversampling);
    if (os_log < 0)
        throw std::invalid_argument("wst: oversampling must be a power of two");
    if (image.width % (1 << bank.scales) != 0 || image.height % (1 << bank.scales) != 0)
        throw std::invalid_argument("wst: image dimensions must be divisible by 2^J");

    ScatteringRep rep;
    rep.scales = bank.scales;
    rep.rotations = bank.rotations;
    rep.max_layer = max_layer;
    rep.oversampling = oversampling;
    rep.input_width = image.width;
    rep.input_height = image.height;

    struct Node {
        Path path;
        ImageGrid signal;
    };
    std::vector<Node> stack;
    stack.push_back({Path{}, image});
    while (!stack.empty()) {
        Node node = std::move(stack.back());
        stack.pop_back();
        const bool expand = node.path.layer() < max_layer;
        const int j_min = node.path.steps.empty() ? 0 : node.path.steps.back().j + 1;

        const int res = detail::resolution_of(bank, node.signal);
        const auto spectrum = detail::spectrum_of(node.signal);

        const int lp_target = std::max(res, bank.scales - os_log);
        auto lp_filter = detail::restrict_filter(bank.lowpass, bank.width, bank.height, res);
        auto lp_values = detail::conv_subsample(spectrum, node.signal.width, node.signal.height,
                                                lp_filter, lp_target - res);
        rep.subbands.push_back(
            {node.path, detail::real_grid(lp_values, node.signal.width >> (lp_target - res),
                                          node.signal.height >> (lp_target - res),
                                          node.path.layer() >= 1)});

        if (!expand) continue;
        for (int j = std::max(j_min, res); j < bank.scales; ++j) {
            const int target = std::max(res, j - os_log);
            for (int r = 0; r < bank.rotations; ++r) {
                auto filt = detail::restrict_filter(bank.band(j, r), bank.width, bank.height, res);
                auto values = detail::conv_subsample(spectrum, node.signal.width,
                                                     node.signal.height, filt, target - res);
                Path child = node.path;
                child.steps.push_back(
                    {static_cast<std::uint16_t>(j), static_cast<std::uint16_t>(r)});
                stack.push_back({std::move(child),
                                 detail::modulus_grid(values, node.signal.width >> (target - res),
                                                      node.signal.height >> (target - res))});
            }
        }
    }
    std::sort(rep.subbands.begin(), rep.subbands.end(),
              [](const Subband& a, const Subband& b) { return canonical_less(a.path, b.path); });
    return rep;
}

/// Normalized scattering transform: each layer-1 subband is divided pointwise
/// by the blurred input modulus, each deeper subband by its parent subband,
/// with a small stabilizer epsilon = epsilon_rel * mean(denominator) that
/// keeps the normalization invariant to global input scaling. The layer-0
/// subband passes through unchanged.
inline ScatteringRep nwst(const ImageGrid& image, const FilterBank& bank, int max_layer,
                          double epsilon_rel, int oversampling = 1) {
    if (epsilon_rel <= 0.0)
        throw std::invalid_argument("nwst: epsilon_rel must be positive");
    ScatteringRep plain = wst(image, bank, max_layer, oversampling);

    // Blurred input modulus, brought down to the output grid.
    ImageGrid abs_input(image.width, image.height);
    for (std::size_t i = 0; i < image.size(); ++i) abs_input.samples[i] = std::abs(image.samples[i]);
    auto spec = detail::spectrum_of(abs_input);
    std::vector<std::complex<double>> blurred(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) blurred[i] = spec[i] * bank.blur[i];
    fft::inverse(image.height, image.width, blurred.data());
    ImageGrid blur_full(image.width, image.height);
    const double inv_n = 1.0 / static_cast<double>(image.size());
    for (std::size_t i = 0; i < blur_full.size(); ++i)
        blur_full.samples[i] = std::max(0.0, blurred[i].real() * inv_n);

    ScatteringRep out = plain;
    out.normalized = true;
    out.epsilon_rel = epsilon_rel;

    auto divide = [epsilon_rel](const ImageGrid& numerator, const ImageGrid& denominator) {
        double mean = 0.0;
        for (double v : denominator.samples) mean += v;
        mean /= static_cast<double>(denominator.size());
        const double eps = epsilon_rel * mean;
        ImageGrid result(numerator.width, numerator.height);
        for (std::size_t i = 0; i < result.size(); ++i) {
            const double q = denominator.samples[i] + eps;
            result.samples[i] = q > 0.0 ? numerator.samples[i] / q : 0.0;
        }
        return result;
    };

    std::map<int, ImageGrid> blur_at;  // blurred modulus resampled per grid size
    for (std::size_t idx = 0; idx < out.subbands.size(); ++idx) {
        const Subband& src = plain.subbands[idx];
        if (src.path.layer() == 0) continue;
        if (src.path.layer() == 1) {
            auto it = blur_at.find(src.grid.width);
            if (it == blur_at.end())
                it = blur_at
                         .emplace(src.grid.width,
                                  detail::resample(blur_full, src.grid.width, src.grid.height))
                         .first;
            out.subbands[idx].grid = divide(src.grid, it->second);
        } else {
            Path parent = src.path;
            parent.steps.pop_back();
            const Subband* parent_sb = plain.find(parent);
            if (!parent_sb)
                throw std::runtime_error("nwst: missing parent subband");
            ImageGrid parent_grid = parent_sb->grid;
            if (parent_grid.width != src.grid.width || parent_grid.height != src.grid.height)
                parent_grid = detail::resample(parent_grid, src.grid.width, src.grid.height);
            out.subbands[idx].grid = divide(src.grid, parent_grid);
        }
    }
    return out;
}

/// Scattering norm of an unnormalized representation: sqrt of the sum of
/// squared subband samples, each subband weighted by its subsampling area so
/// the discrete sum matches the input-grid energy scale.
inline double scattering_norm(const ScatteringRep& rep) {
    if (rep.normalized)
        throw std::invalid_argument("scattering_norm: defined for the unnormalized transform");
    double total = 0.0;
    for (const auto& sb : rep.subbands) {
        const double area = (static_cast<double>(rep.input_width) / sb.grid.width) *
                            (static_cast<double>(rep.input_height) / sb.grid.height);
        double energy = 0.0;
        for (double v : sb.grid.samples) energy += v * v;
        total += area * energy;
    }
    return std::sqrt(total);
}

/// Writes a scattering representation in the binary subband-dump container:
/// magic "SCSB", format version, config, then one record per path (layer,
/// steps, grid dimensions, row-major 64-bit little-endian samples).
inline void write_subband_dump(std::ostream& out, const ScatteringRep& rep) {
    out.write("SCSB", 4);
    detail::write_le<std::uint16_t>(out, 1);
    detail::write_le<std::uint16_t>(out, static_cast<std::uint16_t>(rep.scales));
    detail::write_le<std::uint16_t>(out, static_cast<std::uint16_t>(rep.rotations));
    detail::write_le<std::uint16_t>(out, static_cast<std::uint16_t>(rep.max_layer));
    detail::write_le<std::uint8_t>(out, rep.normalized ? 1 : 0);
    detail::write_f64(out, rep.epsilon_rel);
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(rep.input_width));
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(rep.input_height));
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(rep.subbands.size()));
    for (const auto& sb : rep.subbands) {
        detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(sb.path.layer()));
        for (const auto& step : sb.path.steps) {
            detail::write_le<std::uint16_t>(out, step.j);
            detail::write_le<std::uint16_t>(out, step.r);
        }
        detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(sb.grid.width));
        detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(sb.grid.height));
        for (double v : sb.grid.samples) detail::write_f64(out, v);
    }
}

inline ScatteringRep read_subband_dump(std::istream& in) {
    char magic[4];
    detail::read_bytes(in, magic, 4, "subband dump magic");
    if (std::memcmp(magic, "SCSB", 4) != 0)
        throw std::runtime_error("not a subband dump file");
    if (detail::read_le<std::uint16_t>(in, "version") != 1)
        throw std::runtime_error("unsupported subband dump version");
    ScatteringRep rep;
    rep.scales = detail::read_le<std::uint16_t>(in, "scales");
    rep.rotations = detail::read_le<std::uint16_t>(in, "rotations");
    rep.max_layer = detail::read_le<std::uint16_t>(in, "max layer");
    rep.normalized = detail::read_le<std::uint8_t>(in, "flag") != 0;
    rep.epsilon_rel = detail::read_f64(in, "epsilon");
    rep.input_width = static_cast<int>(detail::read_le<std::uint32_t>(in, "width"));
    rep.input_height = static_cast<int>(detail::read_le<std::uint32_t>(in, "height"));
    const auto count = detail::read_le<std::uint32_t>(in, "subband count");
    rep.subbands.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        Subband sb;
        const auto layer = detail::read_le<std::uint32_t>(in, "layer");
        for (std::uint32_t s = 0; s < layer; ++s) {
            const auto j = detail::read_le<std::uint16_t>(in, "step");
            const auto r = detail::read_le<std::uint16_t>(in, "step");
            sb.path.steps.push_back({j, r});
        }
        const auto w = detail::read_le<std::uint32_t>(in, "grid width");
        const auto h = detail::read_le<std::uint32_t>(in, "grid height");
        sb.grid = ImageGrid(static_cast<int>(w), static_cast<int>(h));
        for (auto& v : sb.grid.samples) v = detail::read_f64(in, "sample");
        rep.subbands.push_back(std::move(sb));
    }
    return rep;
}

/// Scattering distance ||S[a] - S[b]||_S between two unnormalized
/// representations with identical configuration.
inline double scattering_distance(const ScatteringRep& a, const ScatteringRep& b) {
    if (a.normalized || b.normalized)
        throw std::invalid_argument("scattering_distance: defined for unnormalized transforms");
    if (a.subbands.size() != b.subbands.size())
        throw std::invalid_argument("scattering_distance: mismatched representations");
    double total = 0.0;
    for (std::size_t i = 0; i < a.subbands.size(); ++i) {
        const auto& sa = a.subbands[i];
        const auto& sb = b.subbands[i];
        if (!(sa.path == sb.path) || sa.grid.size() != sb.grid.size())
            throw std::invalid_argument("scattering_distance: mismatched representations");
        const double area = (static_cast<double>(a.input_width) / sa.grid.width) *
                            (static_cast<double>(a.input_height) / sa.grid.height);
        double energy = 0.0;
        for (std::size_t k = 0; k < sa.grid.size(); ++k) {
            const double d = sa.grid.samples[k] - sb.grid.samples[k];
            energy += d * d;
        }
        total += area * energy;
    }
    return std::sqrt(total);
}

}  // namespace scatret
