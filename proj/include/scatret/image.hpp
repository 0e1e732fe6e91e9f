#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace scatret {

/// Real-valued 2D sample grid, row-major. The signal carrier used by every
/// transform in this library.
struct ImageGrid {
    int width = 0;
    int height = 0;
    std::vector<double> samples;

    ImageGrid() = default;
    ImageGrid(int w, int h, double fill = 0.0)
        : width(w), height(h),
          samples(check_dims(w, h), fill) {}

    double& at(int row, int col) {
        return samples[static_cast<std::size_t>(row) * width + col];
    }
    double at(int row, int col) const {
        return samples[static_cast<std::size_t>(row) * width + col];
    }
    std::size_t size() const { return samples.size(); }

    bool all_finite() const {
        for (double v : samples)
            if (!std::isfinite(v)) return false;
        return true;
    }

private:
    static std::size_t check_dims(int w, int h) {
        if (w <= 0 || h <= 0)
            throw std::invalid_argument("ImageGrid: dimensions must be positive");
        return static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    }
};

/// Patches cut from one source image; all share identical dimensions and a
/// class label.
struct PatchSet {
    std::vector<ImageGrid> patches;
    std::string class_label;
    std::string source_id;
};

/// Cuts one patch_size x patch_size patch per (row, col) offset. Patches are
/// copies; offsets must keep each patch inside the image.
inline std::vector<ImageGrid> extract_patches(const ImageGrid& image, int patch_size,
                                              const std::vector<std::pair<int, int>>& offsets) {
    if (patch_size <= 0)
        throw std::invalid_argument("extract_patches: patch_size must be positive");
    if (patch_size > image.width || patch_size > image.height)
        throw std::invalid_argument("extract_patches: patch_size exceeds image dimensions");
    std::vector<ImageGrid> out;
    out.reserve(offsets.size());
    for (auto [row, col] : offsets) {
        if (row < 0 || col < 0 || row + patch_size > image.height || col + patch_size > image.width)
            throw std::invalid_argument("extract_patches: offset out of bounds");
        ImageGrid patch(patch_size, patch_size);
        for (int r = 0; r < patch_size; ++r)
            for (int c = 0; c < patch_size; ++c)
                patch.at(r, c) = image.at(row + r, col + c);
        out.push_back(std::move(patch));
    }
    return out;
}

/// Offsets of all non-overlapping patch_size x patch_size tiles, row-major.
inline std::vector<std::pair<int, int>> tiling_offsets(const ImageGrid& image, int patch_size) {
    std::vector<std::pair<int, int>> offsets;
    for (int row = 0; row + patch_size <= image.height; row += patch_size)
        for (int col = 0; col + patch_size <= image.width; col += patch_size)
            offsets.emplace_back(row, col);
    return offsets;
}

/// Five overlapping 256x256 placements inside a 640x480 frame: the corners
/// plus the center.
inline const std::array<std::pair<int, int>, 5>& five_patch_offsets_640x480() {
    static const std::array<std::pair<int, int>, 5> offsets = {
        std::pair{0, 0}, std::pair{0, 384}, std::pair{224, 0}, std::pair{224, 384}, std::pair{112, 192}};
    return offsets;
}

/// Shifts a patch to zero mean and scales it to unit energy (sum of squared
/// samples = 1). Constant patches carry no texture and are rejected.
inline ImageGrid normalize_patch(const ImageGrid& patch) {
    const std::size_t n = patch.size();
    if (n < 2)
        throw std::invalid_argument("normalize_patch: patch needs at least 2 samples");
    double lo = patch.samples[0], hi = patch.samples[0];
    for (double v : patch.samples) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (lo == hi)
        throw std::invalid_argument("normalize_patch: zero-energy patch");
    ImageGrid out = patch;
    // Two refinement passes keep |mean| and |energy - 1| at machine precision
    // even for patches with a large DC offset relative to their variation.
    for (int pass = 0; pass < 2; ++pass) {
        double mean = 0.0;
        for (double v : out.samples) mean += v;
        mean /= static_cast<double>(n);
        double energy = 0.0;
        for (double& v : out.samples) {
            v -= mean;
            energy += v * v;
        }
        if (energy <= 0.0)
            throw std::invalid_argument("normalize_patch: zero-energy patch");
        const double scale = 1.0 / std::sqrt(energy);
        for (double& v : out.samples) v *= scale;
    }
    return out;
}

/// Halves both dimensions; each output sample is the mean of the matching
/// 2x2 input block.
inline ImageGrid downscale_half(const ImageGrid& image) {
    if (image.width % 2 != 0 || image.height % 2 != 0)
        throw std::invalid_argument("downscale_half: dimensions must be even");
    ImageGrid out(image.width / 2, image.height / 2);
    for (int r = 0; r < out.height; ++r)
        for (int c = 0; c < out.width; ++c)
            out.at(r, c) = 0.25 * (image.at(2 * r, 2 * c) + image.at(2 * r, 2 * c + 1) +
                                   image.at(2 * r + 1, 2 * c) + image.at(2 * r + 1, 2 * c + 1));
    return out;
}

/// Circular convolution with a unit-gain sampled Gaussian, truncated at
/// radius ceil(4*sigma). sigma = 0 is the identity.
inline ImageGrid gaussian_blur(const ImageGrid& image, double sigma) {
    if (sigma < 0.0 || !std::isfinite(sigma))
        throw std::invalid_argument("gaussian_blur: sigma must be nonnegative");
    if (sigma == 0.0) return image;

    const int radius = static_cast<int>(std::ceil(4.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    double norm = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * (static_cast<double>(i) * i) / (sigma * sigma));
        norm += kernel[i + radius];
    }
    for (double& w : kernel) w /= norm;

    const int W = image.width, H = image.height;
    auto wrap = [](int i, int n) {
        i %= n;
        return i < 0 ? i + n : i;
    };
    // Separable: rows, then columns.
    ImageGrid tmp(W, H), out(W, H);
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[i + radius] * image.at(r, wrap(c + i, W));
            tmp.at(r, c) = acc;
        }
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[i + radius] * tmp.at(wrap(r + i, H), c);
            out.at(r, c) = acc;
        }
    return out;
}

}  // namespace scatret
