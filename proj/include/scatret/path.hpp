#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace scatret {

/// One (scale, rotation) step of a scattering path.
struct PathStep {
    std::uint16_t j = 0;
    std::uint16_t r = 0;
    auto operator<=>(const PathStep&) const = default;
};

/// Ordered list of steps identifying a scattering subband. The empty path is
/// the layer-0 (plain lowpass) node. Admissible paths have strictly
/// increasing scale indices.
struct Path {
    std::vector<PathStep> steps;

    int layer() const { return static_cast<int>(steps.size()); }

    bool operator==(const Path&) const = default;

    /// Canonical order: by layer, then lexicographic in the steps.
    friend bool canonical_less(const Path& a, const Path& b) {
        if (a.steps.size() != b.steps.size()) return a.steps.size() < b.steps.size();
        return a.steps < b.steps;
    }

    /// "j:r" steps joined by '/'; the empty path prints as "-".
    std::string label() const {
        if (steps.empty()) return "-";
        std::string out;
        for (std::size_t i = 0; i < steps.size(); ++i) {
            if (i) out += '/';
            out += std::to_string(steps[i].j);
            out += ':';
            out += std::to_string(steps[i].r);
        }
        return out;
    }

    static Path parse(const std::string& text) {
        Path p;
        if (text.empty() || text == "-") return p;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const std::size_t sep = text.find('/', pos);
            const std::string part = text.substr(pos, sep == std::string::npos ? sep : sep - pos);
            const std::size_t colon = part.find(':');
            if (colon == std::string::npos)
                throw std::invalid_argument("invalid path selector: " + text);
            try {
                p.steps.push_back({static_cast<std::uint16_t>(std::stoul(part.substr(0, colon))),
                                   static_cast<std::uint16_t>(std::stoul(part.substr(colon + 1)))});
            } catch (const std::exception&) {
                throw std::invalid_argument("invalid path selector: " + text);
            }
            if (sep == std::string::npos) break;
            pos = sep + 1;
        }
        return p;
    }
};

/// All admissible paths of layer 0..max_layer for `scales` dyadic scales and
/// `rotations` orientations, in canonical order (layer-major, then
/// lexicographic). Scale indices increase strictly along every path.
inline std::vector<Path> admissible_paths(int scales, int rotations, int max_layer) {
    if (scales < 1 || rotations < 1 || max_layer < 0)
        throw std::invalid_argument("admissible_paths: invalid parameters");
    std::vector<Path> out;
    out.push_back(Path{});
    std::vector<Path> frontier = {Path{}};
    for (int layer = 1; layer <= max_layer; ++layer) {
        std::vector<Path> next;
        for (const Path& p : frontier) {
            const int j_min = p.steps.empty() ? 0 : p.steps.back().j + 1;
            for (int j = j_min; j < scales; ++j)
                for (int r = 0; r < rotations; ++r) {
                    Path child = p;
                    child.steps.push_back(
                        {static_cast<std::uint16_t>(j), static_cast<std::uint16_t>(r)});
                    next.push_back(std::move(child));
                }
        }
        out.insert(out.end(), next.begin(), next.end());
        frontier = std::move(next);
    }
    return out;
}

}  // namespace scatret
