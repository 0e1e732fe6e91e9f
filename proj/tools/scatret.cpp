// Command-line surface for the texture retrieval pipeline: index a dataset
// into a signature database, query it, evaluate retrieval rates, sweep
// Gaussian blur levels, and inspect per-subband fits.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "scatret/dataset.hpp"
#include "scatret/filterbank.hpp"
#include "scatret/image_io.hpp"
#include "scatret/retrieval.hpp"
#include "scatret/scattering.hpp"
#include "scatret/statmodel.hpp"
#include "scatret/synth.hpp"

namespace {

using nlohmann::json;
using namespace scatret;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string method_name = "nwst-weibull";
    int scales = 3;
    int rotations = 4;
    int max_path = 2;
    double epsilon_rel = 1e-6;
    int dwt_levels = 3;
    int patch_size = 128;
    MorletParams morlet;
    int workers = 0;
    std::uint64_t seed = 1;

    Method method() const {
        auto m = parse_method(method_name);
        if (!m) throw ConfigError("unknown method: " + method_name);
        return *m;
    }

    SigConfig sig_config() const {
        const Method m = method();
        if (m == Method::FwtGgd)
            return SigConfig{0, 0, static_cast<std::uint16_t>(dwt_levels), false, 0.0};
        return SigConfig{static_cast<std::uint16_t>(scales), static_cast<std::uint16_t>(rotations),
                         static_cast<std::uint16_t>(max_path), m == Method::NwstWeibull,
                         m == Method::NwstWeibull ? epsilon_rel : 0.0};
    }

    void validate() const {
        const Method m = method();
        if (m == Method::FwtGgd) {
            if (dwt_levels < 1) throw ConfigError("dwt_levels must be >= 1");
            const int div = 1 << dwt_levels;
            if (patch_size % div != 0)
                throw ConfigError("patch_size must be divisible by 2^dwt_levels");
        } else {
            if (scales < 1 || rotations < 1) throw ConfigError("scales and rotations must be >= 1");
            if (max_path < 0 || max_path > 3) throw ConfigError("max_path must be within 0..3");
            if (epsilon_rel <= 0) throw ConfigError("epsilon_rel must be positive");
            const int div = 1 << scales;
            if (patch_size % div != 0)
                throw ConfigError("patch_size must be divisible by 2^scales");
        }
        if (patch_size < 2) throw ConfigError("patch_size must be >= 2");
        if (morlet.center_freq <= 0 || morlet.bandwidth_factor <= 0 || morlet.slant <= 0 ||
            morlet.lowpass_factor <= 0 || morlet.blur_bins <= 0)
            throw ConfigError("Morlet parameters must be positive");
    }
};

std::string config_line(Method m, const SigConfig& c) {
    std::ostringstream os;
    if (m == Method::FwtGgd) {
        os << "levels=" << c.depth;
    } else {
        os << "J=" << c.scales << " L=" << c.rotations << " M=" << c.depth
           << " normalized=" << (c.normalized ? 1 : 0);
        if (c.normalized) os << " epsilon_rel=" << c.epsilon_rel;
    }
    return os.str();
}

json config_json(Method m, const SigConfig& c) {
    json j;
    j["method"] = method_name(m);
    if (m == Method::FwtGgd) {
        j["levels"] = c.depth;
    } else {
        j["scales"] = c.scales;
        j["rotations"] = c.rotations;
        j["max_path"] = c.depth;
        j["normalized"] = c.normalized;
        j["epsilon_rel"] = c.epsilon_rel;
    }
    return j;
}

json report_json(const EvalReport& report) {
    json j = config_json(report.method, report.config);
    j["records"] = report.records;
    j["classes"] = report.per_class.size();
    j["class_cardinality"] = report.class_cardinality;
    j["overall_rate"] = report.overall;
    json per = json::array();
    for (const auto& [label, rate] : report.per_class) per.push_back({{"class", label}, {"rate", rate}});
    j["per_class"] = per;
    return j;
}

void print_report(const EvalReport& report) {
    std::printf("method: %s\n", method_name(report.method));
    std::printf("config: %s\n", config_line(report.method, report.config).c_str());
    std::printf("records: %zu  classes: %zu  patches-per-class: %zu\n", report.records,
                report.per_class.size(), report.class_cardinality);
    std::printf("overall retrieval rate: %.2f%%\n", 100.0 * report.overall);
    std::printf("per-class rates:\n");
    for (const auto& [label, rate] : report.per_class)
        std::printf("  %-24s %6.2f%%\n", label.c_str(), 100.0 * rate);
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
}

ProgressFn stderr_progress() {
    return [](std::size_t done, std::size_t total) {
        if (done == total || done % 16 == 0)
            std::fprintf(stderr, "\r%zu/%zu patches", done, total);
        if (done == total) std::fprintf(stderr, "\n");
    };
}

int cmd_index(const RunConfig& cfg, const std::string& root, const std::string& out_db) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    FeatureDb db = index_dataset(root, cfg.method(), cfg.sig_config(), cfg.morlet, cfg.patch_size,
                                 cfg.workers, stderr_progress());
    save_db(out_db, db);
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("indexed %zu records in %.2f s -> %s\n", db.records.size(), dt, out_db.c_str());
    return 0;
}

int cmd_query(const RunConfig& cfg, bool method_given, const std::string& db_path,
              const std::string& image_path, std::size_t n) {
    FeatureDb db = load_db(db_path);
    if (method_given && cfg.method() != db.method)
        throw ConfigError("requested method " + cfg.method_name + " does not match database method " +
                          method_name(db.method));
    ImageGrid image = load_grayscale(image_path);
    const auto bank = bank_for(db.method, db.config, image.width, cfg.morlet);
    if (bank && image.height != image.width)
        throw ConfigError("query image must be square for scattering methods");
    Signature sig = extract_signature(image, db.method, db.config, bank ? &*bank : nullptr);
    const auto hits = query(db, sig, n);
    std::printf("%-24s %-8s %s\n", "class", "patch", "similarity");
    for (const auto& hit : hits)
        std::printf("%-24s %-8u %.9g\n", hit.class_label.c_str(), hit.patch_id, hit.similarity);
    return 0;
}

int cmd_evaluate(const RunConfig& cfg, const std::string& db_path, const std::string& json_path) {
    FeatureDb db = load_db(db_path);
    const EvalReport report = retrieval_rate(db, cfg.workers);
    print_report(report);
    if (!json_path.empty()) write_json_file(json_path, report_json(report));
    return 0;
}

int cmd_blur_sweep(const RunConfig& cfg, const std::string& root, const std::vector<double>& sigmas,
                   const std::string& json_path) {
    cfg.validate();
    if (sigmas.empty()) throw ConfigError("blur-sweep needs at least one sigma");
    for (double s : sigmas)
        if (s < 0 || !std::isfinite(s)) throw ConfigError("sigmas must be nonnegative");
    const auto rates = blur_sweep(root, cfg.method(), cfg.sig_config(), sigmas, cfg.morlet,
                                  cfg.patch_size, cfg.workers);
    std::printf("%-10s %s\n", "sigma", "overall rate");
    for (const auto& [sigma, rate] : rates) std::printf("%-10g %.2f%%\n", sigma, 100.0 * rate);
    if (!json_path.empty()) {
        json j = config_json(cfg.method(), cfg.sig_config());
        json rows = json::array();
        for (const auto& [sigma, rate] : rates) rows.push_back({{"sigma", sigma}, {"rate", rate}});
        j["rates"] = rows;
        write_json_file(json_path, j);
    }
    return 0;
}

int cmd_fit_inspect(const RunConfig& cfg, const std::string& image_path,
                    const std::string& selector, const std::string& json_path,
                    const std::string& dump_path) {
    cfg.validate();
    const Method m = cfg.method();
    if (m == Method::FwtGgd)
        throw ConfigError("fit-inspect supports scattering methods only");
    const ImageGrid image = load_grayscale(image_path);
    if (image.width != image.height)
        throw ConfigError("fit-inspect expects a square image");
    const SigConfig sc = cfg.sig_config();
    if (image.width % (1 << sc.scales) != 0)
        throw ConfigError("image side must be divisible by 2^scales");
    const ImageGrid patch = normalize_patch(image);
    const auto bank = build_morlet_bank(image.width, image.height, sc.scales, sc.rotations, cfg.morlet);
    const ScatteringRep rep = sc.normalized ? nwst(patch, bank, sc.depth, sc.epsilon_rel)
                                            : wst(patch, bank, sc.depth);
    if (!dump_path.empty()) {
        std::ofstream out(dump_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open for writing: " + dump_path);
        write_subband_dump(out, rep);
    }

    const Path path = Path::parse(selector);
    if (path.layer() < 1)
        throw ConfigError("invalid path selector (must select a layer >= 1 subband): " + selector);
    const Subband* sb = rep.find(path);
    if (!sb)
        throw ConfigError("invalid path selector (no such subband): " + selector);

    const double peak = *std::max_element(sb->grid.samples.begin(), sb->grid.samples.end());
    const double floor = 1e-12 * peak;
    std::vector<double> kept;
    for (double v : sb->grid.samples)
        if (v > floor) kept.push_back(v);
    const WeibullParams fit = weibull_fit(sb->grid.samples, floor);

    constexpr int kBins = 64;
    double lo = kept[0], hi = kept[0];
    for (double v : kept) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    std::vector<std::size_t> counts(kBins, 0);
    const double width = (hi - lo) / kBins;
    for (double v : kept) {
        int bin = width > 0 ? static_cast<int>((v - lo) / width) : 0;
        if (bin >= kBins) bin = kBins - 1;
        ++counts[static_cast<std::size_t>(bin)];
    }

    std::printf("path: %s  layer: %d  grid: %dx%d\n", path.label().c_str(), path.layer(),
                sb->grid.width, sb->grid.height);
    std::printf("samples: %zu kept, %zu floored\n", kept.size(), sb->grid.size() - kept.size());
    std::printf("weibull fit: lambda=%.9g k=%.9g\n", fit.lambda, fit.k);
    std::printf("histogram (%d uniform bins over [%.9g, %.9g]):\n", kBins, lo, hi);
    for (int b = 0; b < kBins; ++b)
        std::printf("%.9g %zu\n", lo + (b + 0.5) * width, counts[static_cast<std::size_t>(b)]);

    if (!json_path.empty()) {
        json j = config_json(m, sc);
        j["path"] = path.label();
        j["grid"] = {{"width", sb->grid.width}, {"height", sb->grid.height}};
        j["kept"] = kept.size();
        j["floored"] = sb->grid.size() - kept.size();
        j["lambda"] = fit.lambda;
        j["k"] = fit.k;
        j["bin_lo"] = lo;
        j["bin_hi"] = hi;
        j["counts"] = counts;
        write_json_file(json_path, j);
    }
    return 0;
}

int cmd_synth(const std::string& out_dir, int patch_size, int per_class, std::uint64_t seed) {
    if (patch_size < 8) throw ConfigError("patch_size must be >= 8");
    if (per_class < 2) throw ConfigError("per-class patch count must be >= 2");
    make_fine_coarse_dataset(out_dir, patch_size, per_class, seed);
    std::printf("wrote 2 classes x %d patches (%dx%d) under %s\n", per_class, patch_size,
                patch_size, out_dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Texture retrieval with scattering-transform subband statistics"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "Read options from a key=value config file");

    RunConfig cfg;
    app.add_option("--method", cfg.method_name,
                   "Feature method: wst-weibull | nwst-weibull | fwt-ggd")
        ->capture_default_str();
    app.add_option("-J,--scales", cfg.scales, "Dyadic scales J")->capture_default_str();
    app.add_option("-L,--rotations", cfg.rotations, "Rotations L")->capture_default_str();
    app.add_option("-M,--max-path,--max_path", cfg.max_path, "Maximum scattering path length")
        ->capture_default_str();
    app.add_option("--epsilon-rel,--epsilon_rel", cfg.epsilon_rel,
                   "Relative stabilizer for the normalized transform")
        ->capture_default_str();
    app.add_option("--dwt-levels,--dwt_levels", cfg.dwt_levels, "DWT decomposition levels")
        ->capture_default_str();
    app.add_option("--patch-size,--patch_size", cfg.patch_size, "Patch side length in pixels")
        ->capture_default_str();
    app.add_option("--morlet-center-freq,--morlet_center_freq", cfg.morlet.center_freq,
                   "Mother wavelet modulation frequency")
        ->capture_default_str();
    app.add_option("--morlet-bandwidth-factor,--morlet_bandwidth_factor",
                   cfg.morlet.bandwidth_factor, "Mother Gaussian window spatial std")
        ->capture_default_str();
    app.add_option("--slant", cfg.morlet.slant, "Morlet anisotropy (angular width factor)")
        ->capture_default_str();
    app.add_option("--lowpass-factor,--lowpass_factor", cfg.morlet.lowpass_factor,
                   "Scaling-filter spatial std per unit scale")
        ->capture_default_str();
    app.add_option("--blur-bins,--blur_bins", cfg.morlet.blur_bins,
                   "Blur-filter frequency std in DFT bins")
        ->capture_default_str();
    app.add_option("--workers", cfg.workers,
                   "Worker threads (0 = auto; SCATRET_WORKERS overrides)")
        ->capture_default_str();
    app.add_option("--seed", cfg.seed, "Seed for synthetic-data subcommands")->capture_default_str();

    auto* index = app.add_subcommand("index", "Extract signatures for a dataset into a database");
    std::string root, db_path, image_path, json_path, selector, dump_path, out_dir;
    index->add_option("--root", root, "Dataset root (one subdirectory per class)")->required();
    index->add_option("--db", db_path, "Output database file")->required();

    auto* q = app.add_subcommand("query", "Rank database records against a query image");
    q->add_option("--db", db_path, "Database file")->required();
    q->add_option("--image", image_path, "Query image (PGM or PNG)")->required();
    std::size_t top_n = 10;
    q->add_option("-n,--top", top_n, "Number of matches to return")->capture_default_str();

    auto* ev = app.add_subcommand("evaluate", "Compute overall and per-class retrieval rates");
    ev->add_option("--db", db_path, "Database file")->required();
    ev->add_option("--json", json_path, "Also write the report as JSON");

    auto* bs = app.add_subcommand("blur-sweep", "Retrieval rate under increasing Gaussian blur");
    bs->add_option("--root", root, "Dataset root")->required();
    std::string sigmas_text = "0,1,2,4";
    bs->add_option("--sigmas", sigmas_text, "Comma-separated blur sigmas")->capture_default_str();
    bs->add_option("--json", json_path, "Also write the rates as JSON");

    auto* fi = app.add_subcommand("fit-inspect", "Dump one subband's histogram and Weibull fit");
    fi->add_option("--image", image_path, "Input image")->required();
    fi->add_option("--path", selector, "Subband path selector, e.g. 0:1 or 0:1/2:3")->required();
    fi->add_option("--json", json_path, "Also write the dump as JSON");
    fi->add_option("--dump-subbands", dump_path, "Write the full representation as a binary dump");

    auto* sy = app.add_subcommand("synth", "Generate the synthetic fine-vs-coarse dataset");
    sy->add_option("--out", out_dir, "Output dataset root")->required();
    int synth_patch = 64, synth_per_class = 8;
    sy->add_option("--synth-patch-size", synth_patch, "Patch side length")->capture_default_str();
    sy->add_option("--per-class", synth_per_class, "Patches per class")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*index) return cmd_index(cfg, root, db_path);
        if (*q) {
            if (top_n < 1) throw ConfigError("-n must be >= 1");
            return cmd_query(cfg, app.count("--method") > 0, db_path, image_path, top_n);
        }
        if (*ev) return cmd_evaluate(cfg, db_path, json_path);
        if (*bs) {
            std::vector<double> sigmas;
            std::stringstream ss(sigmas_text);
            std::string part;
            while (std::getline(ss, part, ','))
                if (!part.empty()) sigmas.push_back(std::stod(part));
            return cmd_blur_sweep(cfg, root, sigmas, json_path);
        }
        if (*fi) return cmd_fit_inspect(cfg, image_path, selector, json_path, dump_path);
        if (*sy) return cmd_synth(out_dir, synth_patch, synth_per_class, cfg.seed);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
