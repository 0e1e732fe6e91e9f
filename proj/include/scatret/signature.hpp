#pragma once

#include <cstdint>
#include <cstring>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "scatret/dwt.hpp"
#include "scatret/path.hpp"

namespace scatret {

/// Feature-extraction pipeline identifier.
enum class Method : std::uint8_t {
    WstWeibull = 0,   ///< scattering transform + Weibull fits
    NwstWeibull = 1,  ///< normalized scattering transform + Weibull fits
    FwtGgd = 2,       ///< discrete wavelet transform + GGD fits
};

inline const char* method_name(Method m) {
    switch (m) {
        case Method::WstWeibull: return "wst-weibull";
        case Method::NwstWeibull: return "nwst-weibull";
        case Method::FwtGgd: return "fwt-ggd";
    }
    return "?";
}

inline std::optional<Method> parse_method(std::string_view name) {
    if (name == "wst-weibull") return Method::WstWeibull;
    if (name == "nwst-weibull") return Method::NwstWeibull;
    if (name == "fwt-ggd") return Method::FwtGgd;
    return std::nullopt;
}

/// Transform configuration carried by every signature and feature database.
/// `depth` is the maximum path length for scattering methods and the number
/// of decomposition levels for the DWT baseline.
struct SigConfig {
    std::uint16_t scales = 3;
    std::uint16_t rotations = 4;
    std::uint16_t depth = 2;
    bool normalized = false;
    double epsilon_rel = 1e-6;

    bool operator==(const SigConfig&) const = default;
};

struct SigEntry {
    std::string label;
    double p1 = 0.0;  ///< lambda (Weibull) or alpha (GGD)
    double p2 = 0.0;  ///< k (Weibull) or beta (GGD)
};

/// Per-patch feature vector: one fitted parameter pair per subband, in the
/// canonical subband order of its method.
struct Signature {
    Method method = Method::NwstWeibull;
    SigConfig config;
    std::vector<SigEntry> entries;
    std::string class_label;
    std::uint32_t patch_id = 0;
};

/// Canonical subband labels for a method/config pair. Scattering methods list
/// the admissible paths of layers 1..depth; the DWT baseline lists
/// "l<level>:<h|v|d>" for each level.
inline std::vector<std::string> canonical_labels(Method method, const SigConfig& config) {
    std::vector<std::string> labels;
    if (method == Method::FwtGgd) {
        for (int level = 1; level <= config.depth; ++level)
            for (auto o : {DwtOrientation::Horizontal, DwtOrientation::Vertical, DwtOrientation::Diagonal})
                labels.push_back("l" + std::to_string(level) + ":" + dwt_orientation_name(o));
        return labels;
    }
    for (const Path& p : admissible_paths(config.scales, config.rotations, config.depth))
        if (p.layer() >= 1) labels.push_back(p.label());
    return labels;
}

/// FNV-1a hash over (method, config); identifies compatible databases.
inline std::uint64_t config_fingerprint(Method method, const SigConfig& config) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t v, int bytes) {
        for (int i = 0; i < bytes; ++i) {
            h ^= (v >> (8 * i)) & 0xff;
            h *= 1099511628211ull;
        }
    };
    mix(static_cast<std::uint64_t>(method), 1);
    mix(config.scales, 2);
    mix(config.rotations, 2);
    mix(config.depth, 2);
    mix(config.normalized ? 1 : 0, 1);
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(config.epsilon_rel));
    std::memcpy(&bits, &config.epsilon_rel, sizeof(bits));
    mix(bits, 8);
    return h;
}

inline bool same_config(const Signature& a, const Signature& b) {
    return a.method == b.method && a.config == b.config;
}

}  // namespace scatret
