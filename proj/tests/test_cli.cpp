#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "actlearn/bundle.hpp"
#include "actlearn/cli.hpp"
#include "support.hpp"

using namespace actlearn;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result call(std::vector<std::string> args) {
    args.insert(args.begin(), "actlearn");
    std::ostringstream out;
    std::ostringstream err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) { return read_text_file(p); }

}  // namespace

TEST_CASE("usage errors exit 1") {
    CHECK(call({}).code == kExitUsage);
    CHECK(call({"frobnicate"}).code == kExitUsage);
    const auto spec = testing::bundled_spec_path().string();

    const auto r = call({"cluster", "--rho", "1.5", "--input", spec});
    CHECK(r.code == kExitUsage);
    CHECK(r.out.empty());
    CHECK_FALSE(r.err.empty());

    CHECK(call({"cluster", "--input", "/no/such/file.jsonl"}).code == kExitUsage);
    CHECK(call({"recognize", "--model", spec, "--input", spec, "--sequence", "1:ON"}).code == kExitUsage);
    CHECK(call({"recognize", "--model", spec}).code == kExitUsage);
    CHECK(call({"sweep", "--param", "rho", "--grid", "0.9,0.5", "--input", spec}).code == kExitUsage);
    CHECK(call({"sweep", "--param", "beta", "--grid", "0.5", "--input", spec}).code == kExitUsage);
    CHECK(call({"mine", "--input", spec, "--minsup", "abc"}).code == kExitUsage);
    CHECK(call({"train", "--input", spec, "--corpus", spec, "--emission-floor", "0"}).code == kExitUsage);
}

TEST_CASE("help and version exit 0") {
    const auto h = call({"--help"});
    CHECK(h.code == kExitOk);
    CHECK(h.out.find("synth") != std::string::npos);
    CHECK(call({"cluster", "--help"}).code == kExitOk);
    CHECK(call({"--version"}).code == kExitOk);
}

TEST_CASE("data errors exit 2") {
    const auto dir = testing::scratch_dir("cli_bad");
    write_text_file(dir / "bad.jsonl", "{not json\n");
    const auto r = call({"cluster", "--input", (dir / "bad.jsonl").string()});
    CHECK(r.code == kExitData);
    CHECK(r.err.find("line 1") != std::string::npos);

    write_text_file(dir / "bad.json", "{\"schema_version\": 7}");
    CHECK(call({"recognize", "--model", (dir / "bad.json").string(), "--sequence", "1:ON"}).code == kExitData);

    write_text_file(dir / "cfg.json", "{\"rho\": 4}");
    CHECK(call({"--config", (dir / "cfg.json").string(), "cluster", "--input", (dir / "bad.jsonl").string()}).code ==
          kExitData);
    fs::remove_all(dir);
}

TEST_CASE("synth is deterministic and writes manifests") {
    const auto dir = testing::scratch_dir("cli_synth");
    const auto spec = testing::bundled_spec_path().string();
    REQUIRE(call({"synth", "--spec", spec, "--seed", "7", "--output", (dir / "a.jsonl").string()}).code == kExitOk);
    REQUIRE(call({"synth", "--spec", spec, "--seed", "7", "--output", (dir / "b.jsonl").string()}).code == kExitOk);
    CHECK(slurp(dir / "a.jsonl") == slurp(dir / "b.jsonl"));

    const auto manifest = nlohmann::json::parse(slurp(dir / "a.jsonl.manifest.json"));
    CHECK(manifest["subcommand"] == "synth");
    CHECK(manifest["seed"] == 7);
    CHECK(manifest["config"]["rho"] == 0.9);
    CHECK(manifest.contains("wall_clock_seconds"));
    CHECK(manifest.contains("tool_version"));

    // seed override changes the corpus; stdout when no output is given
    const auto other = call({"synth", "--spec", spec, "--seed", "8"});
    REQUIRE(other.code == kExitOk);
    CHECK(other.out != slurp(dir / "a.jsonl"));
    // the global flag is accepted before the subcommand too
    const auto before = call({"--seed", "8", "synth", "--spec", spec});
    CHECK(before.out == other.out);
    fs::remove_all(dir);
}

TEST_CASE("config file and flag precedence") {
    const auto dir = testing::scratch_dir("cli_config");
    const auto spec = testing::bundled_spec_path().string();
    const auto occ = (dir / "occ.jsonl").string();
    REQUIRE(call({"synth", "--spec", spec, "--output", occ}).code == kExitOk);
    write_text_file(dir / "cfg.json", "{\"rho\": 0.5, \"minsup\": \"5%\"}");
    const auto cfg = (dir / "cfg.json").string();

    REQUIRE(call({"--config", cfg, "cluster", "--input", occ, "--output", (dir / "c.json").string()}).code ==
            kExitOk);
    CHECK(nlohmann::json::parse(slurp(dir / "c.json"))["rho"] == 0.5);
    const auto m = nlohmann::json::parse(slurp(dir / "c.json.manifest.json"));
    // recorded in normalized form
    CHECK(m["config"]["minsup"] == "0.05");

    REQUIRE(call({"--config", cfg, "cluster", "--rho", "0.7", "--input", occ, "--output", (dir / "d.json").string()})
                .code == kExitOk);
    CHECK(nlohmann::json::parse(slurp(dir / "d.json"))["rho"] == 0.7);
    fs::remove_all(dir);
}

TEST_CASE("full pipeline in process") {
    const auto dir = testing::scratch_dir("cli_pipeline");
    auto p = [&](const char* name) { return (dir / name).string(); };
    const auto spec = testing::bundled_spec_path().string();

    REQUIRE(call({"synth", "--spec", spec, "--output", p("occ.jsonl"), "--stream", p("stream.csv")}).code == 0);
    REQUIRE(call({"segment", "--input", p("stream.csv"), "--output", p("segments.jsonl")}).code == 0);
    CHECK_FALSE(parse_occurrences(slurp(p("segments.jsonl"))).empty());
    REQUIRE(call({"cluster", "--input", p("occ.jsonl"), "--rho", "0.5", "--output", p("clusters.json")}).code == 0);
    REQUIRE(call({"mine", "--input", p("occ.jsonl"), "--minsup", "3%", "--output", p("patterns.json")}).code == 0);
    REQUIRE(call({"rules", "--patterns", p("patterns.json"), "--min-pre", "0.5", "--output", p("rules.json")}).code ==
            0);
    REQUIRE(call({"train", "--input", p("clusters.json"), "--corpus", p("occ.jsonl"), "--rules", p("rules.json"),
                  "--output", p("model.json")})
                .code == 0);
    const auto model = read_model_bundle(p("model.json"));
    CHECK(model.clusters.size() == 5);
    CHECK(model.hmms.size() == 5);
    CHECK_FALSE(model.rules.empty());

    const auto eval = call({"eval", "--clusters", p("clusters.json"), "--truth", p("occ.jsonl")});
    REQUIRE(eval.code == 0);
    CHECK(eval.out == "precision,recall,f1\n1,1,1\n");

    const auto rec = call({"recognize", "--model", p("model.json"), "--sequence", "75:ON,51:ON,91:ON,96:ON"});
    REQUIRE(rec.code == 0);
    CHECK(rec.out.rfind("cluster_id,log_prob\n", 0) == 0);
    const auto breakfast = std::find_if(model.clusters.begin(), model.clusters.end(),
                                        [](const Cluster& c) { return c.label_hint == "Preparing breakfast"; });
    REQUIRE(breakfast != model.clusters.end());
    CHECK(rec.out.find("\n" + std::to_string(breakfast->cluster_id) + ",") == rec.out.find('\n'));

    // the first day of the corpus as history
    const auto corpus = parse_occurrences(slurp(p("occ.jsonl")));
    std::vector<ActivityOccurrence> history(corpus.begin(), corpus.begin() + 2);
    write_text_file(p("history.jsonl"), render_occurrences(history));
    const auto pred = call({"predict", "--model", p("model.json"), "--history", p("history.jsonl")});
    REQUIRE(pred.code == 0);
    CHECK(pred.out.rfind("rank,label,score,support\n", 0) == 0);
    CHECK(pred.out.find("\n1,") != std::string::npos);

    const auto sweep = call({"sweep", "--param", "min_pre", "--grid", "0.5:1.0:0.1", "--input", p("occ.jsonl")});
    REQUIRE(sweep.code == 0);
    CHECK(sweep.out.rfind("min_pre,rules\n", 0) == 0);

    // clusters named by id can be mined too
    REQUIRE(call({"mine", "--input", p("occ.jsonl"), "--clusters", p("clusters.json"), "--output",
                  p("cluster_patterns.json")})
                .code == 0);
    CHECK(slurp(p("cluster_patterns.json")).find("cluster_0+") != std::string::npos);

    for (const char* artifact : {"occ.jsonl", "stream.csv", "segments.jsonl", "clusters.json", "patterns.json",
                                 "rules.json", "model.json"}) {
        CHECK(fs::exists(dir / (std::string(artifact) + ".manifest.json")));
    }
    fs::remove_all(dir);
}
