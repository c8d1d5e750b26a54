#include <doctest.h>

#include <random>

#include "actlearn/bundle.hpp"
#include "actlearn/evaluation.hpp"
#include "support.hpp"

using namespace actlearn;

namespace {

LabeledAssignment four(int c0, int c1, int c2, int c3) {
    return LabeledAssignment({{"o1", "A", c0}, {"o2", "A", c1}, {"o3", "B", c2}, {"o4", "B", c3}});
}

}  // namespace

TEST_CASE("pairwise correctness") {
    const LabeledAssignment a({{"x", "A", 0}, {"y", "A", 0}, {"z", "A", 1}, {"w", "B", 2}});
    CHECK(correctness(a, "x", "y") == 1);
    CHECK(correctness(a, "x", "z") == 0);
    CHECK(correctness(a, "z", "w") == 1);
    CHECK(correctness(a, "x", "x") == 1);
    CHECK_THROWS_AS(correctness(a, "x", "q"), ValidationError);
    CHECK_THROWS_AS(LabeledAssignment({{"x", "A", 0}, {"x", "B", 1}}), ValidationError);
}

TEST_CASE("bcubed hand cases") {
    const auto perfect = bcubed(four(0, 0, 1, 1));
    CHECK(perfect.precision == 1.0);
    CHECK(perfect.recall == 1.0);
    CHECK(perfect.f1 == 1.0);

    const auto singletons = bcubed(four(0, 1, 2, 3));
    CHECK(singletons.precision == 1.0);
    CHECK(singletons.recall == 0.5);
    CHECK(singletons.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

    const auto one = bcubed(four(0, 0, 0, 0));
    CHECK(one.precision == 0.5);
    CHECK(one.recall == 1.0);
    CHECK(one.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

    CHECK_THROWS_AS(bcubed(LabeledAssignment({})), std::invalid_argument);
}

TEST_CASE("bcubed agrees with the literal pairwise average") {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<LabeledAssignment::Object> objs;
        const int n = 1 + static_cast<int>(rng() % 30);
        const int cats = 1 + static_cast<int>(rng() % 5);
        const int clusters = 1 + static_cast<int>(rng() % 6);
        for (int i = 0; i < n; ++i) {
            objs.push_back({"o" + std::to_string(i), "C" + std::to_string(rng() % static_cast<unsigned>(cats)),
                            static_cast<int>(rng() % static_cast<unsigned>(clusters))});
        }
        const LabeledAssignment a(objs);
        const auto got = bcubed(a);
        const auto want = testing::bcubed_oracle(a);
        REQUIRE(got.precision == doctest::Approx(want.precision).epsilon(1e-12));
        REQUIRE(got.recall == doctest::Approx(want.recall).epsilon(1e-12));
        REQUIRE(got.f1 == doctest::Approx(want.f1).epsilon(1e-12));
        REQUIRE(got.f1 >= 0.0);
        REQUIRE(got.f1 <= 1.0);

        // relabeling clusters and categories changes nothing
        auto renamed = objs;
        for (auto& o : renamed) {
            o.cluster = 100 - o.cluster;
            o.category = "x" + o.category;
        }
        const auto again = bcubed(LabeledAssignment(renamed));
        REQUIRE(again.precision == doctest::Approx(got.precision).epsilon(1e-12));
        REQUIRE(again.recall == doctest::Approx(got.recall).epsilon(1e-12));

        // singleton clustering is always perfectly precise
        auto single = objs;
        for (int i = 0; i < n; ++i) {
            single[static_cast<std::size_t>(i)].cluster = i;
        }
        REQUIRE(bcubed(LabeledAssignment(single)).precision == 1.0);
    }
}

TEST_CASE("assignments from clusters") {
    const auto a = testing::make_occurrence("a", "X", "K", testing::at("2003-05-03T01:00:00"),
                                            testing::at("2003-05-03T01:10:00"), {"1:ON"});
    auto b = a;
    b.sid = "b";
    b.label.reset();
    const std::vector<ActivityOccurrence> corpus{a, b};
    const auto asg = LabeledAssignment::from_clusters(std::vector<Cluster>{{0, {"a"}, "X"}}, corpus);
    CHECK(asg.size() == 1);
    CHECK(asg.at("a").category == "X");
    CHECK_THROWS_AS(LabeledAssignment::from_clusters(std::vector<Cluster>{{0, {"b"}, std::nullopt}}, corpus),
                    ValidationError);
    CHECK_THROWS_AS(LabeledAssignment::from_clusters(std::vector<Cluster>{{0, {"q"}, std::nullopt}}, corpus),
                    ValidationError);
}

TEST_CASE("grids") {
    CHECK(parse_grid("0.5:0.95:0.05").size() == 10);
    CHECK(parse_grid("0.5:0.95:0.05").back() == 0.95);
    CHECK(parse_grid("0.5:0.95:0.05")[3] == 0.65);
    CHECK(parse_grid("0.03,0.05,0.07") == std::vector<double>{0.03, 0.05, 0.07});
    CHECK(parse_grid("0.9") == std::vector<double>{0.9});
    CHECK_THROWS_AS(parse_grid("0.9,0.5"), ValidationError);
    CHECK_THROWS_AS(parse_grid("1:0:0.1"), ValidationError);
    CHECK_THROWS_AS(parse_grid("0:1:0"), ValidationError);
    CHECK_THROWS_AS(parse_grid("a,b"), ValidationError);
    CHECK_THROWS_AS(parse_grid(""), ValidationError);
    CHECK(parse_sweep_parameter("min-pre") == SweepParameter::kMinPre);
    CHECK(to_string(SweepParameter::kMinsup) == "minsup");
    CHECK_THROWS_AS(parse_sweep_parameter("beta"), ValidationError);
}

TEST_CASE("sweep reports") {
    auto spec = parse_synthetic_spec(read_text_file(testing::bundled_spec_path()));
    spec.days = 15;
    const auto corpus = generate_synthetic(spec).occurrences;

    const std::vector<double> one{0.9};
    const auto single = sweep_report(corpus, SweepParameter::kRho, one);
    CHECK(single.points.size() == 1);
    CHECK(single.csv().rfind("rho,f1\n", 0) == 0);

    const auto rho = sweep_report(corpus, SweepParameter::kRho, parse_grid("0.5:0.95:0.05"));
    CHECK(rho.points.size() == 10);
    CHECK(rho.points.front().f1 == 1.0);

    SweepSettings settings;
    settings.timing_repeats = 1;
    const auto ms = sweep_report(corpus, SweepParameter::kMinsup, parse_grid("0.2:0.8:0.2"), settings);
    for (std::size_t i = 1; i < ms.points.size(); ++i) {
        CHECK(ms.points[i].patterns <= ms.points[i - 1].patterns);
    }
    CHECK(ms.csv().rfind("minsup,patterns,ms\n", 0) == 0);

    const auto mp = sweep_report(corpus, SweepParameter::kMinPre, parse_grid("0.5:1.0:0.1"), settings);
    CHECK(mp.points.size() == 6);
    for (std::size_t i = 1; i < mp.points.size(); ++i) {
        CHECK(mp.points[i].rules <= mp.points[i - 1].rules);
    }
    CHECK(mp.csv().rfind("min_pre,rules\n", 0) == 0);

    // deterministic apart from timing
    CHECK(sweep_report(corpus, SweepParameter::kMinPre, parse_grid("0.5:1.0:0.1"), settings).csv() == mp.csv());
    CHECK_THROWS_AS(sweep_report(corpus, SweepParameter::kRho, std::vector<double>{}), std::invalid_argument);
    CHECK_THROWS_AS(sweep_report(corpus, SweepParameter::kRho, std::vector<double>{1.5}), ValidationError);
}
