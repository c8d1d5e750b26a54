#include "actlearn/cli.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "actlearn/activity_hmm.hpp"
#include "actlearn/bundle.hpp"
#include "actlearn/clustering.hpp"
#include "actlearn/evaluation.hpp"
#include "actlearn/ingest.hpp"
#include "actlearn/prediction.hpp"
#include "actlearn/tpminer.hpp"

#ifndef ACTLEARN_VERSION
#define ACTLEARN_VERSION "0.0.0"
#endif

namespace actlearn {

using nlohmann::json;

namespace {

struct Options {
    // global
    std::string config_path;
    std::uint64_t seed = 0;

    // shared
    std::string input;
    std::string output;

    // per stage; presence is checked through the CLI::Option handles
    std::string spec;
    std::string stream;
    std::string corpus;
    std::string rules_path;
    std::string clusters_path;
    std::string patterns_path;
    std::string model;
    std::string history;
    std::string truth;
    std::string sequence;
    std::string param;
    std::string grid;
    std::string time_axis = "clock";
    std::string minsup;
    double rho = 0.9;
    double min_pre = 0.5;
    double smoothing = 0.01;
    double emission_floor = 1e-3;
    long long gap = 300;
    long long period = 86400;
    std::size_t window = kDefaultPredictionWindow;
    std::size_t max_length = 0;
};

struct Flags {
    CLI::Option* seed = nullptr;
    CLI::Option* rho = nullptr;
    CLI::Option* minsup = nullptr;
    CLI::Option* min_pre = nullptr;
    CLI::Option* smoothing = nullptr;
    CLI::Option* emission_floor = nullptr;
    CLI::Option* gap = nullptr;
};

MiningConfig load_config(const std::string& path) {
    MiningConfig c;
    if (path.empty()) {
        return c;
    }
    try {
        const json doc = json::parse(read_text_file(path));
        c.rho = doc.value("rho", c.rho);
        if (const auto it = doc.find("minsup"); it != doc.end()) {
            c.minsup = it->is_string() ? MinSupport::parse(it->get<std::string>()) : MinSupport::parse(it->dump());
        }
        c.min_pre = doc.value("min_pre", c.min_pre);
        c.smoothing = doc.value("smoothing", c.smoothing);
        c.emission_floor = doc.value("emission_floor", c.emission_floor);
        c.segment_gap = Duration{doc.value("segment_gap", c.segment_gap.count())};
    } catch (const json::exception& err) {
        throw ValidationError(fmt::format("config '{}': {}", path, err.what()));
    }
    return c;
}

MiningConfig resolve_config(const Options& o, const Flags& f) {
    auto c = load_config(o.config_path);
    if (f.rho->count() > 0) {
        c.rho = o.rho;
    }
    if (f.minsup->count() > 0) {
        c.minsup = MinSupport::parse(o.minsup);
    }
    if (f.min_pre->count() > 0) {
        c.min_pre = o.min_pre;
    }
    if (f.smoothing->count() > 0) {
        c.smoothing = o.smoothing;
    }
    if (f.emission_floor->count() > 0) {
        c.emission_floor = o.emission_floor;
    }
    if (f.gap->count() > 0) {
        c.segment_gap = Duration{o.gap};
    }
    validate(c);
    return c;
}

json config_to_json(const MiningConfig& c) {
    return {{"rho", c.rho},
            {"minsup", c.minsup.str()},
            {"min_pre", c.min_pre},
            {"smoothing", c.smoothing},
            {"emission_floor", c.emission_floor},
            {"segment_gap", c.segment_gap.count()}};
}

TimeAxis parse_axis(const std::string& name) {
    return name == "absolute" ? TimeAxis::kAbsolute : TimeAxis::kTimeOfDay;
}

std::vector<Cluster> read_clusters(const std::string& path) {
    try {
        const json doc = json::parse(read_text_file(path));
        std::vector<Cluster> out;
        for (const auto& c : doc.at("clusters")) {
            out.push_back(cluster_from_json(c));
        }
        return out;
    } catch (const json::exception& err) {
        throw ValidationError(fmt::format("cluster file '{}': {}", path, err.what()));
    }
}

/// Sends data to `path`, or to `out` when no path was given, and records
/// the artifact for the manifest.
class Outputs {
public:
    explicit Outputs(std::ostream& out) : out_(out) {}

    void emit(const std::string& path, std::string_view contents) {
        if (path.empty() || path == "-") {
            out_ << contents;
            return;
        }
        write_text_file(path, contents);
        written_.push_back(path);
    }

    const std::vector<std::string>& written() const { return written_; }

private:
    std::ostream& out_;
    std::vector<std::string> written_;
};

void write_manifests(const Outputs& outputs, const std::string& subcommand, const MiningConfig& config,
                     const std::map<std::string, std::string>& inputs, std::optional<std::uint64_t> seed,
                     double seconds) {
    json in = json::object();
    for (const auto& [k, v] : inputs) {
        if (!v.empty()) {
            in[k] = v;
        }
    }
    for (const auto& path : outputs.written()) {
        const json manifest = {{"subcommand", subcommand},
                               {"config", config_to_json(config)},
                               {"inputs", in},
                               {"outputs", outputs.written()},
                               {"seed", seed ? json(*seed) : json(nullptr)},
                               {"tool_version", ACTLEARN_VERSION},
                               {"wall_clock_seconds", seconds}};
        write_text_file(path + ".manifest.json", manifest.dump(2) + "\n");
    }
}

std::string format_double(double v) {
    if (std::isinf(v)) {
        return v < 0 ? "-inf" : "inf";
    }
    return fmt::format("{}", v);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Activity learning from smart-home event logs", "actlearn"};
    app.require_subcommand(1);
    app.fallthrough();  // inherited by subcommands, so --seed/--config work after them
    app.set_version_flag("--version", ACTLEARN_VERSION);

    Options o;
    Flags f;
    app.add_option("--config", o.config_path, "JSON file with rho, minsup, min_pre, smoothing, emission_floor, "
                                              "segment_gap")
        ->check(CLI::ExistingFile);
    f.seed = app.add_option("--seed", o.seed, "Random seed override");

    auto* synth = app.add_subcommand("synth", "Generate a labeled synthetic corpus");
    synth->add_option("--spec", o.spec, "Synthetic spec (JSON)")->required()->check(CLI::ExistingFile);
    synth->add_option("--output", o.output, "Occurrences (JSON lines); stdout if omitted");
    synth->add_option("--stream", o.stream, "Also write the merged event stream (CSV)");

    auto* seg = app.add_subcommand("segment", "Split an event log into candidate occurrences");
    seg->add_option("--input", o.input, "Event log (CSV)")->required()->check(CLI::ExistingFile);
    seg->add_option("--output", o.output, "Occurrences (JSON lines)");

    auto* cluster = app.add_subcommand("cluster", "Discover activities by agglomerative clustering");
    cluster->add_option("--input", o.input, "Occurrences (JSON lines)")->required()->check(CLI::ExistingFile);
    cluster->add_option("--output", o.output, "Clusters (JSON)");
    cluster->add_option("--time-axis", o.time_axis, "Interval comparison: clock or absolute")
        ->check(CLI::IsMember({"clock", "absolute"}));

    auto* train = app.add_subcommand("train", "Build one HMM per cluster");
    train->add_option("--input", o.input, "Clusters (JSON)")->required()->check(CLI::ExistingFile);
    train->add_option("--corpus", o.corpus, "Occurrences (JSON lines)")->required()->check(CLI::ExistingFile);
    train->add_option("--rules", o.rules_path, "Bundle whose rules are copied into the model")
        ->check(CLI::ExistingFile);
    train->add_option("--output", o.output, "Model bundle (JSON)");

    auto* mine_cmd = app.add_subcommand("mine", "Mine frequent temporal patterns");
    mine_cmd->add_option("--input", o.input, "Labeled occurrences (JSON lines)")->required()->check(CLI::ExistingFile);
    mine_cmd->add_option("--clusters", o.clusters_path, "Label occurrences by discovered cluster instead")
        ->check(CLI::ExistingFile);
    mine_cmd->add_option("--period", o.period, "Seconds per database sequence")->check(CLI::PositiveNumber);
    mine_cmd->add_option("--max-length", o.max_length, "Longest pattern in symbols (0: no limit)");
    mine_cmd->add_option("--output", o.output, "Patterns (JSON)");

    auto* rules = app.add_subcommand("rules", "Turn mined patterns into prediction rules");
    rules->add_option("--patterns", o.patterns_path, "Patterns (JSON)")->required()->check(CLI::ExistingFile);
    rules->add_option("--output", o.output, "Rule bundle (JSON)");

    auto* recog = app.add_subcommand("recognize", "Rank activity models for an event segment");
    recog->add_option("--model", o.model, "Model bundle")->required()->check(CLI::ExistingFile);
    auto* recog_input = recog->add_option("--input", o.input, "Segment (event log CSV)")->check(CLI::ExistingFile);
    auto* recog_seq = recog->add_option("--sequence", o.sequence, "Inline events: service:type,service:type,...");
    recog_input->excludes(recog_seq);
    recog->add_option("--output", o.output, "CSV cluster_id,log_prob; stdout if omitted");

    auto* predict = app.add_subcommand("predict", "Predict the next activity");
    predict->add_option("--model", o.model, "Bundle holding rules")->required()->check(CLI::ExistingFile);
    predict->add_option("--history", o.history, "Labeled occurrences (JSON lines)")
        ->required()
        ->check(CLI::ExistingFile);
    predict->add_option("--window", o.window, "Slots of recent history to match")->check(CLI::PositiveNumber);
    predict->add_option("--output", o.output, "CSV rank,label,score,support; stdout if omitted");

    auto* eval = app.add_subcommand("eval", "BCubed scores of a clustering");
    eval->add_option("--clusters", o.clusters_path, "Clusters (JSON)")->required()->check(CLI::ExistingFile);
    eval->add_option("--truth", o.truth, "Labeled occurrences (JSON lines)")->required()->check(CLI::ExistingFile);
    eval->add_option("--output", o.output, "CSV precision,recall,f1; stdout if omitted");

    auto* sweep = app.add_subcommand("sweep", "Parameter sweep report");
    sweep->add_option("--param", o.param, "rho, minsup or min_pre")
        ->required()
        ->check(CLI::IsMember({"rho", "minsup", "min_pre", "min-pre"}));
    sweep->add_option("--grid", o.grid, "start:stop:step or a comma list")->required();
    sweep->add_option("--input", o.input, "Labeled occurrences (JSON lines)")->required()->check(CLI::ExistingFile);
    sweep->add_option("--period", o.period, "Seconds per database sequence")->check(CLI::PositiveNumber);
    sweep->add_option("--time-axis", o.time_axis, "Interval comparison: clock or absolute")
        ->check(CLI::IsMember({"clock", "absolute"}));
    sweep->add_option("--output", o.output, "CSV; stdout if omitted");

    // Mining parameters, accepted wherever they apply.
    for (auto* sub : {cluster, sweep}) {
        sub->add_option("--rho", o.rho, "Distance threshold in [0, 1]")->check(CLI::Range(0.0, 1.0));
    }
    for (auto* sub : {mine_cmd, sweep}) {
        sub->add_option("--minsup", o.minsup, "Absolute count, fraction, or percentage");
    }
    rules->add_option("--min-pre", o.min_pre, "Predictability threshold in [0, 1]")->check(CLI::Range(0.0, 1.0));
    train->add_option("--smoothing", o.smoothing, "Laplace constant")->check(CLI::NonNegativeNumber);
    train->add_option("--emission-floor", o.emission_floor, "Emission probability floor")
        ->check(CLI::Range(0.0, 1.0));
    seg->add_option("--gap", o.gap, "Seconds between events that start a new segment")->check(CLI::PositiveNumber);

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << ACTLEARN_VERSION << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    auto* active = app.get_subcommands().front();
    const std::string name = active->get_name();
    auto find = [&](const char* flag) -> CLI::Option* {
        try {
            return active->get_option(flag);
        } catch (const CLI::OptionNotFound&) {
            return nullptr;
        }
    };
    CLI::App placeholder;
    CLI::Option* absent = placeholder.add_flag("--absent");
    auto or_absent = [&](CLI::Option* opt) { return opt != nullptr ? opt : absent; };
    f.rho = or_absent(find("--rho"));
    f.minsup = or_absent(find("--minsup"));
    f.min_pre = or_absent(find("--min-pre"));
    f.smoothing = or_absent(find("--smoothing"));
    f.emission_floor = or_absent(find("--emission-floor"));
    f.gap = or_absent(find("--gap"));

    const auto t0 = std::chrono::steady_clock::now();
    Outputs outputs(out);
    MiningConfig config;
    std::map<std::string, std::string> inputs;
    std::optional<std::uint64_t> seed;
    try {
        try {
            config = resolve_config(o, f);
        } catch (const ValidationError& e) {
            if (!o.config_path.empty()) {
                throw;  // bad config file contents are data errors
            }
            err << "error: " << e.what() << "\n";
            return kExitUsage;
        }
        if (o.emission_floor <= 0.0 || o.emission_floor >= 1.0) {
            err << "error: --emission-floor must lie strictly between 0 and 1\n";
            return kExitUsage;
        }

        if (name == "synth") {
            inputs["spec"] = o.spec;
            auto spec = parse_synthetic_spec(read_text_file(o.spec));
            if (f.seed->count() > 0) {
                spec.seed = o.seed;
            }
            seed = spec.seed;
            const auto corpus = generate_synthetic(spec);
            outputs.emit(o.output, render_occurrences(corpus.occurrences));
            if (!o.stream.empty()) {
                outputs.emit(o.stream, render_event_log(corpus.stream));
            }
        } else if (name == "segment") {
            inputs["input"] = o.input;
            const auto stream = parse_event_log(read_text_file(o.input));
            outputs.emit(o.output, render_occurrences(segments_to_occurrences(segment(stream, config.segment_gap))));
        } else if (name == "cluster") {
            inputs["input"] = o.input;
            const auto corpus = parse_occurrences(read_text_file(o.input));
            if (corpus.empty()) {
                throw ValidationError("no occurrences to cluster");
            }
            const auto result = agglomerate(corpus, config.rho, parse_axis(o.time_axis));
            json clusters = json::array();
            for (const auto& c : result.clusters) {
                auto j = cluster_to_json(c);
                const auto purity = cluster_purity(c, corpus);
                if (purity.majority_label) {
                    j["purity"] = purity.purity;
                }
                clusters.push_back(std::move(j));
            }
            const json doc = {{"rho", config.rho}, {"time_axis", o.time_axis}, {"clusters", std::move(clusters)}};
            outputs.emit(o.output, doc.dump(1) + "\n");
        } else if (name == "train") {
            inputs["input"] = o.input;
            inputs["corpus"] = o.corpus;
            inputs["rules"] = o.rules_path;
            const auto clusters = read_clusters(o.input);
            const auto corpus = parse_occurrences(read_text_file(o.corpus));
            ModelBundle bundle;
            bundle.clusters = clusters;
            for (const auto& c : clusters) {
                bundle.hmms.push_back(build_hmm(c, corpus, config.smoothing, config.emission_floor));
            }
            if (!o.rules_path.empty()) {
                bundle.rules = read_model_bundle(o.rules_path).rules;
            }
            outputs.emit(o.output, render_model_bundle(bundle));
        } else if (name == "mine") {
            inputs["input"] = o.input;
            inputs["clusters"] = o.clusters_path;
            auto corpus = parse_occurrences(read_text_file(o.input));
            if (!o.clusters_path.empty()) {
                std::map<std::string, int> cluster_of;
                for (const auto& c : read_clusters(o.clusters_path)) {
                    for (const auto& sid : c.members) {
                        cluster_of[sid] = c.cluster_id;
                    }
                }
                for (auto& occ : corpus) {
                    const auto it = cluster_of.find(occ.sid);
                    if (it == cluster_of.end()) {
                        throw ValidationError(fmt::format("occurrence '{}' is in no cluster", occ.sid));
                    }
                    occ.label = fmt::format("cluster_{}", it->second);
                }
            }
            const auto db = build_interval_database(corpus, Duration{o.period});
            const auto minsup = config.minsup.resolve(db.size());
            const auto patterns =
                mine(db, minsup, MineOptions{.include_partial = true, .max_length = o.max_length});
            outputs.emit(o.output, render_patterns(patterns, minsup, db.size()));
        } else if (name == "rules") {
            inputs["patterns"] = o.patterns_path;
            const auto patterns = parse_patterns(read_text_file(o.patterns_path));
            ModelBundle bundle;
            bundle.rules = generate_rules(patterns, config.min_pre);
            outputs.emit(o.output, render_model_bundle(bundle));
        } else if (name == "recognize") {
            inputs["model"] = o.model;
            inputs["input"] = o.input;
            if (o.sequence.empty() && o.input.empty()) {
                err << "error: recognize needs --input or --sequence\n";
                return kExitUsage;
            }
            const auto bundle = read_model_bundle(o.model);
            if (bundle.hmms.empty()) {
                throw ValidationError(fmt::format("model '{}' holds no HMMs", o.model));
            }
            std::vector<EventTypeKey> obs;
            if (!o.sequence.empty()) {
                std::size_t pos = 0;
                while (pos <= o.sequence.size()) {
                    const auto comma = std::min(o.sequence.find(',', pos), o.sequence.size());
                    obs.push_back(EventTypeKey::parse(std::string_view(o.sequence).substr(pos, comma - pos)));
                    pos = comma + 1;
                }
            } else {
                obs = parse_event_log(read_text_file(o.input)).keys();
            }
            if (obs.empty()) {
                throw ValidationError("segment has no events");
            }
            const auto result = recognize(obs, bundle.hmms);
            std::string csv = "cluster_id,log_prob\n";
            for (const auto& [id, logp] : result.ranking) {
                csv += fmt::format("{},{}\n", id, format_double(logp));
            }
            outputs.emit(o.output, csv);
        } else if (name == "predict") {
            inputs["model"] = o.model;
            inputs["history"] = o.history;
            const auto bundle = read_model_bundle(o.model);
            const auto occurrences = parse_occurrences(read_text_file(o.history));
            std::vector<LabeledInterval> intervals;
            for (const auto& occ : occurrences) {
                if (!occ.label) {
                    throw ValidationError(fmt::format("history occurrence '{}' has no label", occ.sid));
                }
                intervals.push_back({*occ.label, occ.start, occ.end});
            }
            const auto history = to_endpoint_sequence(std::move(intervals), "history");
            std::string csv = "rank,label,score,support\n";
            std::size_t rank = 1;
            for (const auto& p : predict_next(history, bundle.rules, o.window)) {
                csv += fmt::format("{},{},{},{}\n", rank++, p.activity_label, p.score, p.rule.support);
            }
            outputs.emit(o.output, csv);
        } else if (name == "eval") {
            inputs["clusters"] = o.clusters_path;
            inputs["truth"] = o.truth;
            const auto clusters = read_clusters(o.clusters_path);
            const auto corpus = parse_occurrences(read_text_file(o.truth));
            const auto score = bcubed(LabeledAssignment::from_clusters(clusters, corpus));
            outputs.emit(o.output, fmt::format("precision,recall,f1\n{},{},{}\n", score.precision, score.recall,
                                               score.f1));
        } else if (name == "sweep") {
            inputs["input"] = o.input;
            std::vector<double> grid;
            SweepParameter parameter{};
            try {
                parameter = parse_sweep_parameter(o.param);
                grid = parse_grid(o.grid);
            } catch (const ValidationError& e) {
                err << "error: " << e.what() << "\n";
                return kExitUsage;
            }
            const auto corpus = parse_occurrences(read_text_file(o.input));
            SweepSettings settings;
            settings.config = config;
            settings.axis = parse_axis(o.time_axis);
            settings.period = Duration{o.period};
            outputs.emit(o.output, sweep_report(corpus, parameter, grid, settings).csv());
        }

        const auto seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_manifests(outputs, name, config, inputs, seed, seconds);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitOk;
}

}  // namespace actlearn
