#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "scatret/retrieval.hpp"
#include "scatret/synth.hpp"
#include "testutil.hpp"

using namespace scatret;
using testutil::TempDir;

namespace {

Signature make_record(const std::string& cls, std::uint32_t id,
                      std::vector<std::pair<double, double>> params,
                      Method method = Method::WstWeibull) {
    Signature s;
    s.method = method;
    s.config = SigConfig{3, 4, 2, false, 0.0};
    s.class_label = cls;
    s.patch_id = id;
    for (std::size_t i = 0; i < params.size(); ++i)
        s.entries.push_back({"sub" + std::to_string(i), params[i].first, params[i].second});
    return s;
}

FeatureDb toy_db(std::vector<Signature> records) {
    FeatureDb db;
    db.method = records.front().method;
    db.config = records.front().config;
    db.records = std::move(records);
    return db;
}

// Tiny on-disk dataset: two texture classes distinguished by their dominant
// frequency content, several 32x32 patches each.
void write_toy_dataset(const std::filesystem::path& root, int patches_per_class = 4) {
    std::mt19937_64 rng(9001);
    std::normal_distribution<double> g(0.0, 1.0);
    for (const std::string cls : {"stripes", "noise"}) {
        std::filesystem::create_directories(root / cls);
        for (int i = 0; i < patches_per_class; ++i) {
            ImageGrid img(32, 32);
            if (cls == "stripes") {
                for (int r = 0; r < 32; ++r)
                    for (int c = 0; c < 32; ++c)
                        img.at(r, c) = 0.5 + 0.4 * std::sin(2.0 * M_PI * (c + i) / 8.0) +
                                       0.03 * g(rng);
            } else {
                for (double& v : img.samples) v = 0.5 + 0.22 * g(rng);
            }
            save_pgm(root / cls / ("p" + std::to_string(i) + ".pgm"), img);
        }
    }
}

}  // namespace

TEST_CASE("query clamps to the database size and excludes self-matches") {
    const FeatureDb db = toy_db({make_record("a", 0, {{1.0, 2.0}})});
    const Signature q = make_record("q", 0, {{2.0, 2.5}});
    const auto hits = query(db, q, 5);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].class_label == "a");

    // Self-identity is excluded even at nonzero distance elsewhere.
    const FeatureDb db2 =
        toy_db({make_record("a", 0, {{1.0, 2.0}}), make_record("a", 1, {{5.0, 1.0}})});
    const auto hits2 = query(db2, db2.records[0], 5);
    REQUIRE(hits2.size() == 1);
    CHECK(hits2[0].patch_id == 1);
}

TEST_CASE("an identical foreign record ranks first at similarity 0") {
    const FeatureDb db = toy_db({make_record("far", 0, {{9.0, 0.5}}),
                                 make_record("same", 3, {{1.0, 2.0}})});
    const Signature q = make_record("query", 9, {{1.0, 2.0}});
    const auto hits = query(db, q, 2);
    REQUIRE(hits[0].class_label == "same");
    REQUIRE(hits[0].similarity == 0.0);
}

TEST_CASE("toy ranking matches the hand-evaluated kernel ordering") {
    // Single subband; query (1, 2). Kernels: vs (2,2): 0.8; vs (1,2.2):
    // ~0.99886; vs (4,2): 2*sqrt(16)/17 = 8/17. Similarities -ln K order:
    // (1,2.2) < (2,2) < (4,2).
    const FeatureDb db = toy_db({make_record("a", 0, {{2.0, 2.0}}),
                                 make_record("b", 0, {{1.0, 2.2}}),
                                 make_record("c", 0, {{4.0, 2.0}})});
    const Signature q = make_record("q", 0, {{1.0, 2.0}});
    const auto hits = query(db, q, 3);
    REQUIRE(hits.size() == 3);
    CHECK(hits[0].class_label == "b");
    CHECK(hits[1].class_label == "a");
    CHECK(hits[2].class_label == "c");
    CHECK(hits[1].similarity == Catch::Approx(-std::log(0.8)).margin(1e-12));
    CHECK(hits[2].similarity == Catch::Approx(-std::log(8.0 / 17.0)).margin(1e-12));
}

TEST_CASE("query validates the config fingerprint and n") {
    const FeatureDb db = toy_db({make_record("a", 0, {{1.0, 2.0}})});
    Signature q = make_record("q", 0, {{1.0, 2.0}});
    q.config.scales = 5;
    CHECK_THROWS_AS(query(db, q, 1), std::invalid_argument);
    const Signature ok = make_record("q", 0, {{1.0, 2.0}});
    CHECK_THROWS_AS(query(db, ok, 0), std::invalid_argument);
}

TEST_CASE("well-separated synthetic classes retrieve perfectly") {
    std::vector<Signature> records;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.95, 1.05);
    for (int i = 0; i < 4; ++i)
        records.push_back(make_record("low", i, {{1.0 * u(rng), 2.0 * u(rng)}}));
    for (int i = 0; i < 4; ++i)
        records.push_back(make_record("high", i, {{10.0 * u(rng), 2.0 * u(rng)}}));
    const EvalReport report = retrieval_rate(toy_db(std::move(records)));
    CHECK(report.overall == 1.0);
    for (const auto& [cls, rate] : report.per_class) CHECK(rate == 1.0);
}

TEST_CASE("all-identical signatures score by the documented tie-break") {
    // 2 classes x 2 patches, every signature equal: each query ranks the
    // remaining three records purely by (class, patch id). For class-a
    // records the first hit is the same-class sibling; for class-b records
    // it is (a,0). Overall rate = (1 + 1 + 0 + 0) / 4.
    std::vector<Signature> records;
    for (const std::string cls : {"a", "b"})
        for (int i = 0; i < 2; ++i) records.push_back(make_record(cls, i, {{1.0, 2.0}}));
    const EvalReport report = retrieval_rate(toy_db(std::move(records)));
    CHECK(report.overall == Catch::Approx(0.5));
}

TEST_CASE("single-class databases retrieve at rate 1") {
    std::vector<Signature> records;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    for (int i = 0; i < 16; ++i) records.push_back(make_record("only", i, {{u(rng), u(rng)}}));
    const EvalReport report = retrieval_rate(toy_db(std::move(records)));
    CHECK(report.overall == 1.0);
}

TEST_CASE("retrieval_rate rejects unequal or singleton classes") {
    CHECK_THROWS_WITH(
        retrieval_rate(toy_db({make_record("a", 0, {{1, 2}}), make_record("a", 1, {{1, 2}}),
                               make_record("b", 0, {{1, 2}})})),
        Catch::Matchers::ContainsSubstring("unequal class sizes"));
    CHECK_THROWS_AS(
        retrieval_rate(toy_db({make_record("a", 0, {{1, 2}}), make_record("b", 0, {{1, 2}})})),
        std::invalid_argument);
}

TEST_CASE("query ranking is invariant to database record order") {
    std::vector<Signature> records;
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.5, 3.0);
    for (int i = 0; i < 6; ++i)
        records.push_back(make_record(i % 2 ? "x" : "y", i, {{u(rng), u(rng)}}));
    const Signature q = make_record("q", 0, {{1.0, 1.0}});
    const auto hits1 = query(toy_db(records), q, 6);
    std::reverse(records.begin(), records.end());
    const auto hits2 = query(toy_db(records), q, 6);
    REQUIRE(hits1.size() == hits2.size());
    for (std::size_t i = 0; i < hits1.size(); ++i) {
        CHECK(hits1[i].class_label == hits2[i].class_label);
        CHECK(hits1[i].patch_id == hits2[i].patch_id);
    }
}

TEST_CASE("overall rate equals the mean of per-class rates") {
    std::vector<Signature> records;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.5, 3.0);
    for (const std::string cls : {"a", "b", "c"})
        for (int i = 0; i < 5; ++i) records.push_back(make_record(cls, i, {{u(rng), u(rng)}}));
    const EvalReport report = retrieval_rate(toy_db(std::move(records)));
    double mean = 0.0;
    for (const auto& [cls, rate] : report.per_class) mean += rate;
    mean /= static_cast<double>(report.per_class.size());
    REQUIRE(report.overall == Catch::Approx(mean).margin(1e-12));
}

TEST_CASE("database files carry the documented binary layout") {
    const FeatureDb db = toy_db({make_record("tex", 7, {{1.5, 2.5}, {0.5, 1.0}})});
    std::stringstream buffer;
    save_db(buffer, db);
    const std::string bytes = buffer.str();
    REQUIRE(bytes.size() == 4 + 2 + 1 + 2 + 2 + 2 + 1 + 8 + 4 + (4 + 3) + 4 + 4 + 2 * 16);
    CHECK(bytes.compare(0, 4, "SCRT") == 0);
    CHECK(static_cast<unsigned char>(bytes[4]) == 1);  // version u16 LE low byte
    CHECK(static_cast<unsigned char>(bytes[5]) == 0);
    CHECK(static_cast<unsigned char>(bytes[6]) == 0);  // method id wst-weibull
    // Config block: J=3, L=4, depth=2 as u16 LE.
    CHECK(static_cast<unsigned char>(bytes[7]) == 3);
    CHECK(static_cast<unsigned char>(bytes[9]) == 4);
    CHECK(static_cast<unsigned char>(bytes[11]) == 2);
}

TEST_CASE("database save/load round-trip preserves everything") {
    TempDir dir("db");
    const FeatureDb db = toy_db({make_record("alpha", 0, {{1.5, 2.5}, {0.5, 1.0}}),
                                 make_record("alpha", 1, {{1.6, 2.4}, {0.6, 1.1}})});
    const auto path = dir.path() / "t.scrt";
    save_db(path, db);
    const FeatureDb back = load_db(path);
    REQUIRE(back.method == db.method);
    REQUIRE(back.config == db.config);
    REQUIRE(back.records.size() == db.records.size());
    for (std::size_t i = 0; i < db.records.size(); ++i) {
        CHECK(back.records[i].class_label == db.records[i].class_label);
        CHECK(back.records[i].patch_id == db.records[i].patch_id);
        REQUIRE(back.records[i].entries.size() == db.records[i].entries.size());
        for (std::size_t e = 0; e < db.records[i].entries.size(); ++e) {
            CHECK(back.records[i].entries[e].p1 == db.records[i].entries[e].p1);
            CHECK(back.records[i].entries[e].p2 == db.records[i].entries[e].p2);
        }
    }
    CHECK_THROWS_AS(load_db(dir.path() / "missing.scrt"), std::runtime_error);
}

TEST_CASE("save_db rejects duplicate identities") {
    std::stringstream buffer;
    CHECK_THROWS_AS(
        save_db(buffer, toy_db({make_record("a", 0, {{1, 2}}), make_record("a", 0, {{2, 2}})})),
        std::invalid_argument);
}

TEST_CASE("index_dataset walks classes deterministically and fits every patch") {
    TempDir dir("idx");
    write_toy_dataset(dir.path());
    const SigConfig config{3, 4, 2, true, 1e-6};
    const FeatureDb db =
        index_dataset(dir.path(), Method::NwstWeibull, config, MorletParams{}, 32, 2);
    REQUIRE(db.records.size() == 8);
    CHECK(db.records[0].class_label == "noise");  // sorted class order
    CHECK(db.records[0].patch_id == 0);
    CHECK(db.records[4].class_label == "stripes");
    for (const auto& rec : db.records) REQUIRE(rec.entries.size() == 60);

    // Indexing twice yields byte-identical databases.
    std::stringstream a, b;
    save_db(a, db);
    save_db(b, index_dataset(dir.path(), Method::NwstWeibull, config, MorletParams{}, 32, 1));
    REQUIRE(a.str() == b.str());

    // The two synthetic classes separate perfectly.
    const EvalReport report = retrieval_rate(db);
    CHECK(report.overall == 1.0);
}

TEST_CASE("index_dataset propagates errors with the offending file named") {
    TempDir dir("idx_err");
    std::filesystem::create_directories(dir.path() / "flat");
    save_pgm(dir.path() / "flat" / "const.pgm", ImageGrid(32, 32, 0.5));
    CHECK_THROWS_WITH(index_dataset(dir.path(), Method::WstWeibull, SigConfig{3, 4, 2, false, 0.0},
                                    MorletParams{}, 32, 1),
                      Catch::Matchers::ContainsSubstring("const.pgm"));
}

TEST_CASE("index_dataset on an empty root reports no classes") {
    TempDir dir("idx_empty");
    CHECK_THROWS_WITH(index_dataset(dir.path(), Method::WstWeibull, SigConfig{3, 4, 2, false, 0.0},
                                    MorletParams{}, 32, 1),
                      Catch::Matchers::ContainsSubstring("no classes found"));
}

TEST_CASE("blur_sweep: sigma 0 reproduces the pristine rate; blur hurts fine detail") {
    TempDir dir("sweep");
    make_fine_coarse_dataset(dir.path(), 32, 4, 99);
    const SigConfig config{3, 4, 2, false, 0.0};
    const auto rates =
        blur_sweep(dir.path(), Method::WstWeibull, config, {0.0, 2.0}, MorletParams{}, 32, 2);
    REQUIRE(rates.size() == 2);
    CHECK(rates[0].first == 0.0);
    const FeatureDb pristine =
        index_dataset(dir.path(), Method::WstWeibull, config, MorletParams{}, 32, 2);
    CHECK(rates[0].second == retrieval_rate(pristine).overall);
    CHECK(rates[1].second <= rates[0].second + 1e-12);
}
