#pragma once

#include <algorithm>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "scatret/image.hpp"
#include "scatret/image_io.hpp"

namespace scatret {

/// One dataset patch traced back to its class and source file.
struct DatasetPatch {
    std::string class_label;
    std::uint32_t patch_id = 0;
    std::string source_file;
    ImageGrid patch;
};

/// Loads a class-per-directory dataset: every image file inside a class
/// directory is cut into all non-overlapping patch_size x patch_size tiles.
/// Directories and files are visited in sorted order and patch ids are
/// assigned sequentially per class, so the result is deterministic.
inline std::vector<DatasetPatch> load_dataset(const std::filesystem::path& root, int patch_size) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(root))
        throw std::invalid_argument("no classes found: " + root.string() + " is not a directory");
    std::vector<fs::path> class_dirs;
    for (const auto& entry : fs::directory_iterator(root))
        if (entry.is_directory()) class_dirs.push_back(entry.path());
    std::sort(class_dirs.begin(), class_dirs.end());
    if (class_dirs.empty())
        throw std::invalid_argument("no classes found: " + root.string());

    std::vector<DatasetPatch> out;
    for (const auto& dir : class_dirs) {
        const std::string label = dir.filename().string();
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.is_regular_file()) files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        std::uint32_t next_id = 0;
        for (const auto& file : files) {
            ImageGrid image;
            try {
                image = load_grayscale(file);
            } catch (const std::exception& e) {
                throw std::runtime_error(file.string() + ": " + e.what());
            }
            if (image.width < patch_size || image.height < patch_size)
                throw std::runtime_error(file.string() + ": smaller than the patch size");
            auto patches = extract_patches(image, patch_size, tiling_offsets(image, patch_size));
            for (auto& p : patches)
                out.push_back({label, next_id++, file.filename().string(), std::move(p)});
        }
        if (next_id == 0)
            throw std::runtime_error("no images found in class directory: " + dir.string());
    }
    return out;
}

}  // namespace scatret
