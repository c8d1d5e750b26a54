#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "actlearn/bundle.hpp"
#include "support.hpp"

using namespace actlearn;
using nlohmann::json;

namespace {

ModelBundle sample_bundle(std::mt19937_64& rng) {
    ModelBundle b;
    for (int id = 0; id < 3; ++id) {
        b.clusters.push_back({id, {"s" + std::to_string(id)}, id % 2 ? std::optional<std::string>("L") : std::nullopt});
        b.hmms.push_back(testing::random_hmm(rng, id, 1 + rng() % 3, 1 + rng() % 4, 1e-3 * (1 + id)));
    }
    const auto db = testing::random_interval_db(rng);
    b.rules = generate_rules(mine(db, 1, MineOptions{.include_partial = true}), 0.0);
    return b;
}

}  // namespace

TEST_CASE("bundle round trip is bit identical") {
    std::mt19937_64 rng(1);
    const auto dir = testing::scratch_dir("bundle");
    for (int trial = 0; trial < 50; ++trial) {
        const auto b = sample_bundle(rng);
        const auto path = dir / "model.json";
        write_model_bundle(b.clusters, b.hmms, b.rules, path);
        const auto back = read_model_bundle(path);
        REQUIRE(back == b);
        for (std::size_t m = 0; m < b.hmms.size(); ++m) {
            REQUIRE(back.hmms[m].transition() == b.hmms[m].transition());
            REQUIRE(back.hmms[m].emission() == b.hmms[m].emission());
            REQUIRE(back.hmms[m].initial() == b.hmms[m].initial());
        }
        REQUIRE(render_model_bundle(back) == render_model_bundle(b));
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("bundle read failures") {
    const auto dir = testing::scratch_dir("bundle_bad");
    std::mt19937_64 rng(2);
    const auto good = sample_bundle(rng);
    const auto text = render_model_bundle(good);

    CHECK_THROWS_AS(read_model_bundle(dir / "missing.json"), BundleError);
    CHECK_THROWS_AS(parse_model_bundle(text.substr(0, text.size() / 2)), BundleError);
    CHECK_THROWS_AS(parse_model_bundle("{}"), BundleError);

    auto doc = json::parse(text);
    doc["schema_version"] = 99;
    CHECK_THROWS_AS(parse_model_bundle(doc.dump()), BundleError);

    doc = json::parse(text);
    doc["hmms"][1]["emission"][0][0] = doc["hmms"][1]["emission"][0][0].get<double>() + 0.25;
    try {
        parse_model_bundle(doc.dump());
        FAIL("expected a bundle error");
    } catch (const BundleError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("hmms[1]") != std::string::npos);
        CHECK(msg.find("emission row 0") != std::string::npos);
    }

    if (!good.rules.empty()) {
        doc = json::parse(text);
        doc["rules"][0]["predictability"] = 0.123456;
        CHECK_THROWS_AS(parse_model_bundle(doc.dump()), BundleError);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("bundle write failures") {
    std::mt19937_64 rng(3);
    auto b = sample_bundle(rng);
    const auto dir = testing::scratch_dir("bundle_write");

    std::vector<Cluster> missing{b.clusters[0]};
    CHECK_THROWS_AS(write_model_bundle(missing, b.hmms, b.rules, dir / "m.json"), BundleError);
    // a rules-only bundle is fine
    CHECK_NOTHROW(write_model_bundle({}, {}, b.rules, dir / "rules.json"));

    if (!b.rules.empty()) {
        auto bad = b.rules;
        bad[0].predictability = NAN;
        CHECK_THROWS_AS(write_model_bundle(b.clusters, b.hmms, bad, dir / "nan.json"), BundleError);
    }
    CHECK_THROWS_AS(write_model_bundle(b.clusters, b.hmms, b.rules, dir / "no" / "such" / "dir.json"), BundleError);
    CHECK_FALSE(std::filesystem::exists(dir / "nan.json"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("pattern files") {
    std::mt19937_64 rng(4);
    const auto db = testing::random_interval_db(rng);
    const auto all = mine(db, 1, MineOptions{.include_partial = true});
    const auto text = render_patterns(all, 1, db.size());
    CHECK(parse_patterns(text) == all);

    auto doc = json::parse(text);
    doc["patterns"][0]["well_formed"] = !doc["patterns"][0]["well_formed"].get<bool>();
    CHECK_THROWS_AS(parse_patterns(doc.dump()), ValidationError);
    CHECK_THROWS_AS(parse_patterns("[]"), ValidationError);

    // the Unicode minus is accepted on input
    const auto unicode = parse_patterns(R"({"patterns": [{"slots": [["a+"], ["a−"]], "support": 2, "well_formed": true}]})");
    REQUIRE(unicode.size() == 1);
    CHECK(unicode[0].str() == "<{a+},{a-}>");
}
