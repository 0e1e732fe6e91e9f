#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>

#include "scatret/image.hpp"
#include "scatret/image_io.hpp"

namespace scatret {

/// Writes a deterministic two-class synthetic texture dataset under `root`:
/// class "coarse" holds smooth random fields, class "fine" the same kind of
/// field with strong white-noise detail on top. The classes are separable
/// through their high-frequency statistics only, so blurring erases the
/// distinction — the intended probe for blur-robustness experiments.
inline void make_fine_coarse_dataset(const std::filesystem::path& root, int patch_size,
                                     int patches_per_class, std::uint64_t seed) {
    namespace fs = std::filesystem;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    auto smooth_field = [&](double correlation_sigma) {
        ImageGrid noise(patch_size, patch_size);
        for (double& v : noise.samples) v = uniform(rng);
        ImageGrid field = gaussian_blur(noise, correlation_sigma);
        // Stretch to full contrast so quantization to 8 bits keeps the shape.
        double lo = field.samples[0], hi = field.samples[0];
        for (double v : field.samples) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        for (double& v : field.samples) v = (v - lo) / (hi - lo);
        return field;
    };

    for (const char* label : {"coarse", "fine"}) {
        const fs::path dir = root / label;
        fs::create_directories(dir);
        for (int i = 0; i < patches_per_class; ++i) {
            ImageGrid img = smooth_field(6.0);
            if (std::string(label) == "fine") {
                for (double& v : img.samples)
                    v = 0.55 * v + 0.45 * uniform(rng);
            }
            char name[32];
            std::snprintf(name, sizeof(name), "p%03d.pgm", i);
            save_pgm(dir / name, img);
        }
    }
}

}  // namespace scatret
