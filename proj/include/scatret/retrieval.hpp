#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "scatret/dataset.hpp"
#include "scatret/dwt.hpp"
#include "scatret/filterbank.hpp"
#include "scatret/image.hpp"
#include "scatret/parallel.hpp"
#include "scatret/scattering.hpp"
#include "scatret/serial.hpp"
#include "scatret/signature.hpp"
#include "scatret/similarity.hpp"
#include "scatret/statmodel.hpp"

namespace scatret {

/// In-memory signature database. All records share one (method, config)
/// pair and carry unique (class_label, patch_id) identities.
struct FeatureDb {
    Method method = Method::NwstWeibull;
    SigConfig config;
    std::vector<Signature> records;

    std::uint64_t fingerprint() const { return config_fingerprint(method, config); }
};

/// Extracts the feature signature of one raw patch: normalize, transform
/// with the configured method, fit the per-subband models. For scattering
/// methods the caller provides the (shared, immutable) filterbank.
inline Signature extract_signature(const ImageGrid& patch, Method method, const SigConfig& config,
                                   const FilterBank* bank) {
    const ImageGrid normalized = normalize_patch(patch);
    if (method == Method::FwtGgd)
        return fit_signature(dwt2(normalized, config.depth));
    if (!bank)
        throw std::invalid_argument("extract_signature: scattering methods need a filterbank");
    if (method == Method::NwstWeibull)
        return fit_signature(nwst(normalized, *bank, config.depth, config.epsilon_rel));
    return fit_signature(wst(normalized, *bank, config.depth));
}

/// Builds the filterbank matching a scattering config, or nothing for the
/// DWT baseline.
inline std::optional<FilterBank> bank_for(Method method, const SigConfig& config, int patch_size,
                                          const MorletParams& params = {}) {
    if (method == Method::FwtGgd) return std::nullopt;
    return build_morlet_bank(patch_size, patch_size, config.scales, config.rotations, params);
}

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

namespace detail {

inline FeatureDb index_patches(const std::vector<DatasetPatch>& patches, Method method,
                               const SigConfig& config, const MorletParams& morlet,
                               int patch_size, int workers, const ProgressFn& progress) {
    FeatureDb db;
    db.method = method;
    db.config = config;
    db.config.normalized = (method == Method::NwstWeibull);
    if (method != Method::NwstWeibull) db.config.epsilon_rel = 0.0;
    const auto bank = bank_for(method, db.config, patch_size, morlet);

    db.records.resize(patches.size());
    std::atomic<std::size_t> done{0};
    std::mutex progress_mutex;
    parallel_for(patches.size(), workers, [&](std::size_t i) {
        const DatasetPatch& dp = patches[i];
        try {
            Signature sig =
                extract_signature(dp.patch, method, db.config, bank ? &*bank : nullptr);
            sig.class_label = dp.class_label;
            sig.patch_id = dp.patch_id;
            db.records[i] = std::move(sig);
        } catch (const std::exception& e) {
            throw std::runtime_error(dp.class_label + "/" + dp.source_file + " patch " +
                                     std::to_string(dp.patch_id) + ": " + e.what());
        }
        const std::size_t n = done.fetch_add(1) + 1;
        if (progress) {
            std::lock_guard<std::mutex> lock(progress_mutex);
            progress(n, patches.size());
        }
    });
    return db;
}

}  // namespace detail

/// Indexes a class-per-directory dataset: every patch is normalized,
/// transformed, fitted, and stored in deterministic (class, patch id) order.
inline FeatureDb index_dataset(const std::filesystem::path& root, Method method,
                               const SigConfig& config, const MorletParams& morlet = {},
                               int patch_size = 128, int workers = 0,
                               const ProgressFn& progress = {}) {
    const auto patches = load_dataset(root, patch_size);
    return detail::index_patches(patches, method, config, morlet, patch_size, workers, progress);
}

/// One query result; smaller similarity = closer match.
struct QueryHit {
    std::string class_label;
    std::uint32_t patch_id = 0;
    double similarity = 0.0;
};

/// Returns the up-to-n nearest records, ascending by similarity with ties
/// broken by (class_label, patch_id). A database record with the query's own
/// (class_label, patch_id) identity is excluded.
inline std::vector<QueryHit> query(const FeatureDb& db, const Signature& q, std::size_t n) {
    if (n < 1)
        throw std::invalid_argument("query: n must be >= 1");
    if (config_fingerprint(q.method, q.config) != db.fingerprint())
        throw std::invalid_argument("query: signature config does not match the database");
    std::vector<QueryHit> hits;
    hits.reserve(db.records.size());
    for (const Signature& rec : db.records) {
        if (rec.class_label == q.class_label && rec.patch_id == q.patch_id) continue;
        hits.push_back({rec.class_label, rec.patch_id, signature_similarity(q, rec)});
    }
    auto less = [](const QueryHit& a, const QueryHit& b) {
        if (a.similarity != b.similarity) return a.similarity < b.similarity;
        if (a.class_label != b.class_label) return a.class_label < b.class_label;
        return a.patch_id < b.patch_id;
    };
    if (hits.size() > n) {
        std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(n), hits.end(), less);
        hits.resize(n);
    } else {
        std::sort(hits.begin(), hits.end(), less);
    }
    return hits;
}

/// Retrieval-rate evaluation: for every record, its c-1 nearest neighbors
/// (self excluded) are retrieved and scored by same-class membership.
struct EvalReport {
    double overall = 0.0;
    std::vector<std::pair<std::string, double>> per_class;  // sorted by class label
    Method method = Method::NwstWeibull;
    SigConfig config;
    std::size_t records = 0;
    std::size_t class_cardinality = 0;
};

inline EvalReport retrieval_rate(const FeatureDb& db, int workers = 0) {
    std::map<std::string, std::size_t> class_sizes;
    for (const auto& rec : db.records) ++class_sizes[rec.class_label];
    if (class_sizes.empty())
        throw std::invalid_argument("retrieval_rate: empty database");
    const std::size_t c = class_sizes.begin()->second;
    for (const auto& [label, size] : class_sizes) {
        if (size != c)
            throw std::invalid_argument("retrieval_rate: unequal class sizes (" + label + ")");
    }
    if (c < 2)
        throw std::invalid_argument("retrieval_rate: classes need at least 2 patches");

    std::vector<double> rates(db.records.size());
    parallel_for(db.records.size(), workers, [&](std::size_t i) {
        const auto hits = query(db, db.records[i], c - 1);
        std::size_t same = 0;
        for (const auto& hit : hits)
            if (hit.class_label == db.records[i].class_label) ++same;
        rates[i] = static_cast<double>(same) / static_cast<double>(c - 1);
    });

    EvalReport report;
    report.method = db.method;
    report.config = db.config;
    report.records = db.records.size();
    report.class_cardinality = c;
    std::map<std::string, double> class_acc;
    double total = 0.0;
    for (std::size_t i = 0; i < db.records.size(); ++i) {
        class_acc[db.records[i].class_label] += rates[i];
        total += rates[i];
    }
    report.overall = total / static_cast<double>(db.records.size());
    for (const auto& [label, acc] : class_acc)
        report.per_class.emplace_back(label, acc / static_cast<double>(c));
    return report;
}

/// Blurs every dataset patch with each sigma in turn, re-indexes, and
/// evaluates. sigma = 0 reproduces the pristine-dataset rate exactly.
inline std::vector<std::pair<double, double>> blur_sweep(
    const std::filesystem::path& root, Method method, const SigConfig& config,
    const std::vector<double>& sigmas, const MorletParams& morlet = {}, int patch_size = 128,
    int workers = 0, const ProgressFn& progress = {}) {
    const auto patches = load_dataset(root, patch_size);
    std::vector<std::pair<double, double>> rates;
    rates.reserve(sigmas.size());
    for (double sigma : sigmas) {
        std::vector<DatasetPatch> blurred = patches;
        parallel_for(blurred.size(), workers, [&](std::size_t i) {
            blurred[i].patch = gaussian_blur(blurred[i].patch, sigma);
        });
        const FeatureDb db =
            detail::index_patches(blurred, method, config, morlet, patch_size, workers, progress);
        rates.emplace_back(sigma, retrieval_rate(db, workers).overall);
    }
    return rates;
}

// --- Database persistence -------------------------------------------------
//
// Layout (little-endian): magic "SCRT", format version u16, method id u8,
// config block (J u16, L u16, depth u16, normalized u8, epsilon_rel f64),
// record count u32, then per record: class label (u32 length + UTF-8),
// patch id u32, entry count u32, entries as (param1, param2) f64 pairs in
// canonical subband order.

inline constexpr std::uint16_t kDbFormatVersion = 1;

inline void save_db(std::ostream& out, const FeatureDb& db) {
    std::set<std::pair<std::string, std::uint32_t>> seen;
    for (const auto& rec : db.records)
        if (!seen.emplace(rec.class_label, rec.patch_id).second)
            throw std::invalid_argument("save_db: duplicate (class, patch) identity");
    out.write("SCRT", 4);
    detail::write_le<std::uint16_t>(out, kDbFormatVersion);
    detail::write_le<std::uint8_t>(out, static_cast<std::uint8_t>(db.method));
    detail::write_le<std::uint16_t>(out, db.config.scales);
    detail::write_le<std::uint16_t>(out, db.config.rotations);
    detail::write_le<std::uint16_t>(out, db.config.depth);
    detail::write_le<std::uint8_t>(out, db.config.normalized ? 1 : 0);
    detail::write_f64(out, db.config.epsilon_rel);
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(db.records.size()));
    for (const auto& rec : db.records) {
        detail::write_string(out, rec.class_label);
        detail::write_le<std::uint32_t>(out, rec.patch_id);
        detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(rec.entries.size()));
        for (const auto& entry : rec.entries) {
            detail::write_f64(out, entry.p1);
            detail::write_f64(out, entry.p2);
        }
    }
    if (!out)
        throw std::runtime_error("save_db: write failed");
}

inline void save_db(const std::filesystem::path& path, const FeatureDb& db) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path.string());
    save_db(out, db);
}

inline FeatureDb load_db(std::istream& in) {
    char magic[4];
    detail::read_bytes(in, magic, 4, "database magic");
    if (std::memcmp(magic, "SCRT", 4) != 0)
        throw std::runtime_error("not a feature database file");
    if (detail::read_le<std::uint16_t>(in, "format version") != kDbFormatVersion)
        throw std::runtime_error("unsupported database format version");
    FeatureDb db;
    const auto method_id = detail::read_le<std::uint8_t>(in, "method id");
    if (method_id > 2)
        throw std::runtime_error("unknown method id in database");
    db.method = static_cast<Method>(method_id);
    db.config.scales = detail::read_le<std::uint16_t>(in, "scales");
    db.config.rotations = detail::read_le<std::uint16_t>(in, "rotations");
    db.config.depth = detail::read_le<std::uint16_t>(in, "depth");
    db.config.normalized = detail::read_le<std::uint8_t>(in, "flag") != 0;
    db.config.epsilon_rel = detail::read_f64(in, "epsilon");
    const auto count = detail::read_le<std::uint32_t>(in, "record count");
    const auto labels = canonical_labels(db.method, db.config);
    db.records.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        Signature rec;
        rec.method = db.method;
        rec.config = db.config;
        rec.class_label = detail::read_string(in, "class label");
        rec.patch_id = detail::read_le<std::uint32_t>(in, "patch id");
        const auto entries = detail::read_le<std::uint32_t>(in, "entry count");
        rec.entries.reserve(entries);
        for (std::uint32_t e = 0; e < entries; ++e) {
            SigEntry entry;
            entry.label = e < labels.size() ? labels[e] : "sub" + std::to_string(e);
            entry.p1 = detail::read_f64(in, "parameter");
            entry.p2 = detail::read_f64(in, "parameter");
            rec.entries.push_back(std::move(entry));
        }
        db.records.push_back(std::move(rec));
    }
    return db;
}

inline FeatureDb load_db(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("file not found: " + path.string());
    return load_db(in);
}

}  // namespace scatret
