// Acceptance suite: runs every release criterion end to end and prints one
// PASS/FAIL line per criterion. Returns nonzero if any runnable criterion
// fails. Criterion 8 needs the externally obtained texture dataset and is
// skipped (not failed) unless SCATRET_D1_ROOT points at it.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "scatret/dataset.hpp"
#include "scatret/retrieval.hpp"
#include "scatret/scattering.hpp"
#include "scatret/similarity.hpp"
#include "scatret/statmodel.hpp"
#include "scatret/synth.hpp"
#include "testutil.hpp"

using namespace scatret;

namespace {

int g_failures = 0;

void report(int criterion, const char* name, bool pass, const std::string& detail) {
    std::printf("%s  criterion %2d  %-38s %s\n", pass ? "PASS" : "FAIL", criterion, name,
                detail.c_str());
    if (!pass) ++g_failures;
}

void skip(int criterion, const char* name, const std::string& why) {
    std::printf("SKIP  criterion %2d  %-38s %s\n", criterion, name, why.c_str());
}

std::string fmt(const char* format, ...) {
    va_list args;
    va_start(args, format);
    char buf[512];
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

// 1. Weibull ML recovery from inverse-CDF draws at (lambda=2, k=1.5).
void criterion_weibull_recovery() {
    std::mt19937_64 rng(20240131);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> xs(1 << 16);
    for (auto& x : xs) {
        double v;
        do {
            v = u(rng);
        } while (v <= 0.0);
        x = 0.5 * std::pow(-std::log(v), 1.0 / 1.5);
    }
    const auto t0 = std::chrono::steady_clock::now();
    const WeibullParams p = weibull_fit(xs, 1e-300);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double err_l = std::abs(p.lambda - 2.0) / 2.0;
    const double err_k = std::abs(p.k - 1.5) / 1.5;
    report(1, "Weibull ML recovery", err_l <= 0.02 && err_k <= 0.02 && secs < 1.0,
           fmt("lambda=%.4f k=%.4f (rel err %.3f%%/%.3f%%) in %.3fs", p.lambda, p.k, 100 * err_l,
               100 * err_k, secs));
}

// 2. Modulus of complex standard-normal draws fits a shape near 2.
void criterion_rayleigh_closure() {
    std::mt19937_64 rng(20240207);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> xs(1 << 16);
    for (auto& x : xs) x = std::hypot(g(rng), g(rng));
    const WeibullParams p = weibull_fit(xs, 1e-300);
    const double err = std::abs(p.k - 2.0) / 2.0;
    report(2, "Rayleigh closure", err <= 0.03, fmt("k=%.4f (rel err %.3f%%)", p.k, 100 * err));
}

// 3. Closed-form kernel vs quadrature Bhattacharyya coefficient.
void criterion_kernel_exactness() {
    std::mt19937_64 rng(20240301);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto oracle = [](const WeibullParams& a, const WeibullParams& b) {
        const double upper = 1.5 * std::max(weibull_quantile(1.0 - 1e-14, a),
                                            weibull_quantile(1.0 - 1e-14, b));
        return bc_numeric([&](double x) { return weibull_pdf(x, a); },
                          [&](double x) { return weibull_pdf(x, b); }, 0.0, upper);
    };
    double worst_abs = 0.0;
    for (int t = 0; t < 100; ++t) {
        const double k = 0.6 * std::pow(4.0 / 0.6, u(rng));
        const WeibullParams a{0.2 * std::pow(25.0, u(rng)), k};
        const WeibullParams b{0.2 * std::pow(25.0, u(rng)), k};
        worst_abs = std::max(worst_abs, std::abs(weibull_kernel(a, b) - oracle(a, b)));
    }
    // Same-subband regime: shape gap <= 20%, scale ratio <= 2 (log-uniform).
    double worst_rel = 0.0;
    for (int t = 0; t < 100; ++t) {
        const double k1 = 0.7 * std::pow(4.0 / 0.7, u(rng));
        const double k2 = k1 * (1.0 + 0.2 * u(rng));
        const double l1 = 0.2 * std::pow(25.0, u(rng));
        const double l2 = l1 * std::pow(2.0, 2.0 * u(rng) - 1.0);
        const WeibullParams a{l1, k1}, b{l2, k2};
        const double bc = oracle(a, b);
        worst_rel = std::max(worst_rel, std::abs(weibull_kernel(a, b) - bc) / bc);
    }
    report(3, "kernel exactness vs quadrature", worst_abs <= 1e-8 && worst_rel <= 0.05,
           fmt("equal-shape |err| %.2e; near-shape rel err %.3f%%", worst_abs, 100 * worst_rel));
}

// 4. Kernel Gram matrices of random parameter sets are PSD.
void criterion_gram_psd() {
    std::mt19937_64 rng(20240401);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double min_eig = 1e9;
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 8;
        std::vector<WeibullParams> params;
        for (int i = 0; i < n; ++i)
            params.push_back({0.1 * std::pow(100.0, u(rng)), 0.5 * std::pow(8.0, u(rng))});
        std::vector<double> gram(n * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) gram[i * n + j] = weibull_kernel(params[i], params[j]);
        for (double e : testutil::symmetric_eigenvalues(gram, n)) min_eig = std::min(min_eig, e);
    }
    report(4, "kernel Gram PSD", min_eig >= -1e-9, fmt("min eigenvalue %.2e", min_eig));
}

// 5. Scattering sanity: non-expansiveness, subband count, NWST invariance.
void criterion_scattering_sanity() {
    const FilterBank bank = build_morlet_bank(64, 64, 3, 4);
    double worst_excess = -1e9;
    for (int t = 0; t < 100; ++t) {
        const ImageGrid f1 = testutil::random_image(64, 64, 50000 + 2 * t);
        const ImageGrid f2 = testutil::random_image(64, 64, 50001 + 2 * t);
        const double lhs = scattering_distance(wst(f1, bank, 2), wst(f2, bank, 2));
        double din = 0.0;
        for (std::size_t i = 0; i < f1.size(); ++i) {
            const double d = f1.samples[i] - f2.samples[i];
            din += d * d;
        }
        worst_excess = std::max(worst_excess, lhs - std::sqrt(din));
    }
    const bool a = worst_excess <= 1e-6;

    const std::size_t count = wst(testutil::random_image(64, 64, 51000), bank, 2).subbands.size();
    const bool b = count == 61;

    const ImageGrid f = testutil::random_image(64, 64, 52000);
    ImageGrid cf = f;
    for (double& v : cf.samples) v *= 19.0;
    const ScatteringRep na = nwst(f, bank, 2, 1e-6);
    const ScatteringRep nb = nwst(cf, bank, 2, 1e-6);
    double rel = 0.0;
    for (std::size_t i = 0; i < na.subbands.size(); ++i) {
        if (na.subbands[i].path.layer() == 0) continue;
        for (std::size_t k = 0; k < na.subbands[i].grid.size(); ++k) {
            const double va = na.subbands[i].grid.samples[k];
            const double vb = nb.subbands[i].grid.samples[k];
            if (std::abs(va) > 1e-12) rel = std::max(rel, std::abs(va - vb) / std::abs(va));
        }
    }
    const bool c = rel <= 1e-6;
    report(5, "scattering sanity", a && b && c,
           fmt("(a) excess %.2e (b) %zu subbands (c) scaling rel err %.2e", worst_excess, count,
               rel));
}

// 6. Filterbank: Littlewood-Paley deviation and DC responses.
void criterion_filterbank() {
    const FilterBank bank = build_morlet_bank(128, 128, 3, 4);
    const LittlewoodPaley lp = littlewood_paley(bank);
    double dc = 0.0;
    for (const auto& filt : bank.bandpass) dc = std::max(dc, std::abs(filt[0]));
    const bool dc_ok = dc <= 1e-6;
    const bool dev_ok = lp.max_deviation <= 0.3;
    report(6, "filterbank Littlewood-Paley", dev_ok && dc_ok,
           fmt("deviation %.4f (bound 0.3)%s; DC max %.2e", lp.max_deviation,
               dev_ok ? "" : " -- structurally unattainable alongside non-expansiveness at the "
                            "Nyquist rim; see docs/ledger",
               dc));
}

// 7. DWT baseline: perfect reconstruction and energy conservation.
void criterion_dwt() {
    double worst_rec = 0.0, worst_energy = 0.0;
    for (int t = 0; t < 50; ++t) {
        const ImageGrid img = testutil::random_image(128, 128, 60000 + t, false);
        const DwtPyramid pyr = dwt2(img, 3);
        double e_in = 0.0;
        for (double v : img.samples) e_in += v * v;
        double e_pyr = 0.0;
        for (double v : pyr.approx.samples) e_pyr += v * v;
        for (const auto& [key, grid] : pyr.details)
            for (double v : grid.samples) e_pyr += v * v;
        worst_energy = std::max(worst_energy, std::abs(e_pyr - e_in));
        const ImageGrid back = idwt2(pyr);
        for (std::size_t i = 0; i < img.size(); ++i)
            worst_rec = std::max(worst_rec, std::abs(back.samples[i] - img.samples[i]));
    }
    report(7, "DWT perfect reconstruction", worst_rec <= 1e-9 && worst_energy <= 1e-9,
           fmt("max |x - idwt2(dwt2(x))| %.2e; max energy drift %.2e", worst_rec, worst_energy));
}

// 8. Retrieval-rate reproduction on the externally assembled dataset.
void criterion_table() {
    const char* root = std::getenv("SCATRET_D1_ROOT");
    if (!root || !std::filesystem::is_directory(root)) {
        skip(8, "retrieval-rate reproduction",
             "needs the externally obtained texture dataset; set SCATRET_D1_ROOT");
        return;
    }
    struct Row {
        Method method;
        int depth;
        double expected;
    };
    const std::vector<Row> rows = {
        {Method::NwstWeibull, 3, 0.8530},
        {Method::NwstWeibull, 2, 0.8490},
        {Method::WstWeibull, 2, 0.7893},
        {Method::FwtGgd, 3, 0.7550},
    };
    bool all_ok = true;
    std::string detail;
    for (const auto& row : rows) {
        SigConfig config;
        if (row.method == Method::FwtGgd) {
            config = SigConfig{0, 0, static_cast<std::uint16_t>(row.depth), false, 0.0};
        } else {
            config = SigConfig{3, 4, static_cast<std::uint16_t>(row.depth),
                               row.method == Method::NwstWeibull,
                               row.method == Method::NwstWeibull ? 1e-6 : 0.0};
        }
        const FeatureDb db = index_dataset(root, row.method, config, MorletParams{}, 128, 0);
        const double rate = retrieval_rate(db).overall;
        const bool ok = std::abs(rate - row.expected) <= 0.03;
        all_ok = all_ok && ok;
        detail += fmt("%s/M=%d %.2f%% (ref %.2f%%) ", method_name(row.method), row.depth,
                      100 * rate, 100 * row.expected);
    }
    report(8, "retrieval-rate reproduction", all_ok, detail);
}

// 9. Blur sweep on the synthetic fine-vs-coarse dataset.
void criterion_blur_sweep() {
    const testutil::TempDir dir("acceptance_blur");
    make_fine_coarse_dataset(dir.path(), 64, 8, 20240901);
    const std::vector<double> sigmas = {0.0, 1.0, 2.0, 4.0};
    bool strict_drop = false, all_monotone = true;
    std::string detail;
    for (const Method method : {Method::WstWeibull, Method::NwstWeibull, Method::FwtGgd}) {
        SigConfig config{3, 4, 2, method == Method::NwstWeibull,
                         method == Method::NwstWeibull ? 1e-6 : 0.0};
        if (method == Method::FwtGgd) config = SigConfig{0, 0, 3, false, 0.0};
        const auto rates = blur_sweep(dir.path(), method, config, sigmas, MorletParams{}, 64, 0);
        detail += fmt("%s:", method_name(method));
        for (const auto& [sigma, rate] : rates) detail += fmt(" %.3f", rate);
        detail += "  ";
        for (std::size_t i = 1; i < rates.size(); ++i)
            if (rates[i].second > rates[i - 1].second + 0.01) all_monotone = false;
        if (method == Method::WstWeibull)
            strict_drop = rates.back().second < rates.front().second;
    }
    report(9, "blur-sweep degradation", strict_drop && all_monotone, detail);
}

// 10. Determinism: byte-identical databases, worker-count-independent reports.
void criterion_determinism() {
    const testutil::TempDir dir("acceptance_det");
    make_fine_coarse_dataset(dir.path(), 64, 4, 20241001);
    const SigConfig config{3, 4, 2, true, 1e-6};
    auto dump = [&](int workers) {
        const FeatureDb db =
            index_dataset(dir.path(), Method::NwstWeibull, config, MorletParams{}, 64, workers);
        std::stringstream out;
        save_db(out, db);
        return out.str();
    };
    const std::string once = dump(1);
    const std::string twice = dump(1);
    const std::string parallel = dump(4);
    const bool bytes_ok = once == twice && once == parallel;

    std::stringstream in(once);
    const FeatureDb db = load_db(in);
    const EvalReport r1 = retrieval_rate(db, 1);
    const EvalReport r4 = retrieval_rate(db, 4);
    bool report_ok = r1.overall == r4.overall && r1.per_class.size() == r4.per_class.size();
    for (std::size_t i = 0; report_ok && i < r1.per_class.size(); ++i)
        report_ok = r1.per_class[i] == r4.per_class[i];
    report(10, "determinism", bytes_ok && report_ok,
           fmt("db bytes identical: %s; reports identical: %s", bytes_ok ? "yes" : "no",
               report_ok ? "yes" : "no"));
}

}  // namespace

int main() {
    criterion_weibull_recovery();
    criterion_rayleigh_closure();
    criterion_kernel_exactness();
    criterion_gram_psd();
    criterion_scattering_sanity();
    criterion_filterbank();
    criterion_dwt();
    criterion_table();
    criterion_blur_sweep();
    criterion_determinism();
    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all runnable criteria passed\n");
    return 0;
}
