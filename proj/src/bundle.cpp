#include "actlearn/bundle.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace actlearn {

using nlohmann::json;

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(fmt::format("cannot open '{}' for reading", path.string()));
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(fmt::format("cannot open '{}' for writing", path.string()));
        }
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) {
            throw Error(fmt::format("write to '{}' failed", path.string()));
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(fmt::format("cannot write '{}'", path.string()));
    }
}

json pattern_to_json(const TemporalPattern& pattern) {
    json slots = json::array();
    for (const auto& slot : pattern.slots) {
        json symbols = json::array();
        for (const auto& s : slot) {
            symbols.push_back(s.str());
        }
        slots.push_back(std::move(symbols));
    }
    return slots;
}

TemporalPattern pattern_from_json(const json& slots, std::size_t support) {
    std::vector<SymbolSet> out;
    for (const auto& slot : slots.get_ref<const json::array_t&>()) {
        SymbolSet symbols;
        for (const auto& s : slot.get_ref<const json::array_t&>()) {
            symbols.push_back(EndpointSymbol::parse(s.get_ref<const std::string&>()));
        }
        if (symbols.empty()) {
            throw ValidationError("pattern has an empty slot");
        }
        out.push_back(std::move(symbols));
    }
    return TemporalPattern::from_slots(std::move(out), support);
}

json cluster_to_json(const Cluster& c) {
    return {{"cluster_id", c.cluster_id},
            {"members", c.members},
            {"label_hint", c.label_hint ? json(*c.label_hint) : json(nullptr)}};
}

Cluster cluster_from_json(const json& j) {
    Cluster c;
    c.cluster_id = j.at("cluster_id").get<int>();
    c.members = j.at("members").get<std::vector<std::string>>();
    if (c.members.empty()) {
        throw ValidationError(fmt::format("cluster {} has no members", c.cluster_id));
    }
    if (const auto it = j.find("label_hint"); it != j.end() && !it->is_null()) {
        c.label_hint = it->get<std::string>();
    }
    return c;
}

namespace {

json keys_to_json(const std::vector<EventTypeKey>& keys) {
    json arr = json::array();
    for (const auto& k : keys) {
        arr.push_back(k.str());
    }
    return arr;
}

std::vector<EventTypeKey> keys_from_json(const json& arr) {
    std::vector<EventTypeKey> out;
    for (const auto& k : arr.get_ref<const json::array_t&>()) {
        out.push_back(EventTypeKey::parse(k.get_ref<const std::string&>()));
    }
    return out;
}

void require_finite(std::span<const double> row, int cluster_id, std::string_view what) {
    for (double v : row) {
        if (!std::isfinite(v)) {
            throw BundleError(fmt::format("hmm for cluster {}: non-finite value in {}", cluster_id, what));
        }
    }
}

json hmm_to_json(const ActivityHMM& m) {
    require_finite(m.initial(), m.cluster_id(), "initial vector");
    for (const auto& row : m.transition()) {
        require_finite(row, m.cluster_id(), "transition matrix");
    }
    for (const auto& row : m.emission()) {
        require_finite(row, m.cluster_id(), "emission matrix");
    }
    return {{"cluster_id", m.cluster_id()},
            {"states", keys_to_json(m.states())},
            {"vocabulary", keys_to_json(m.vocabulary())},
            {"transition", m.transition()},
            {"emission", m.emission()},
            {"initial", m.initial()},
            {"emission_floor", m.emission_floor()}};
}

ActivityHMM hmm_from_json(const json& j) {
    return ActivityHMM::create(j.at("cluster_id").get<int>(), keys_from_json(j.at("states")),
                               keys_from_json(j.at("vocabulary")), j.at("transition").get<Matrix>(),
                               j.at("emission").get<Matrix>(), j.at("initial").get<std::vector<double>>(),
                               j.at("emission_floor").get<double>());
}

json rule_to_json(const PredictionRule& r) {
    if (!std::isfinite(r.predictability)) {
        throw BundleError(fmt::format("rule {}: non-finite predictability", r.full.str()));
    }
    return {{"prefix", pattern_to_json(r.prefix)},
            {"prefix_support", r.prefix.support},
            {"full", pattern_to_json(r.full)},
            {"support", r.support},
            {"predicted_symbol", r.predicted_symbol.str()},
            {"predictability", r.predictability}};
}

PredictionRule rule_from_json(const json& j) {
    PredictionRule r;
    r.support = j.at("support").get<std::size_t>();
    r.full = pattern_from_json(j.at("full"), r.support);
    r.prefix = pattern_from_json(j.at("prefix"), j.at("prefix_support").get<std::size_t>());
    r.predicted_symbol = EndpointSymbol::parse(j.at("predicted_symbol").get<std::string>());
    r.predictability = j.at("predictability").get<double>();
    if (r.full.length() < 2 || prefix_of(r.full).slots != r.prefix.slots ||
        r.full.final_symbol() != r.predicted_symbol) {
        throw ValidationError(fmt::format("rule {}: prefix or predicted symbol does not match", r.full.str()));
    }
    if (r.prefix.support == 0 || r.predictability != static_cast<double>(r.support) /
                                                          static_cast<double>(r.prefix.support)) {
        throw ValidationError(fmt::format("rule {}: predictability does not match supports", r.full.str()));
    }
    return r;
}

}  // namespace

std::string render_model_bundle(const ModelBundle& bundle) {
    std::set<int> ids;
    json clusters = json::array();
    for (const auto& c : bundle.clusters) {
        ids.insert(c.cluster_id);
        clusters.push_back(cluster_to_json(c));
    }
    json hmms = json::array();
    for (const auto& m : bundle.hmms) {
        if (!bundle.clusters.empty() && ids.count(m.cluster_id()) == 0) {
            throw BundleError(fmt::format("hmm references cluster {} which is not in the bundle", m.cluster_id()));
        }
        hmms.push_back(hmm_to_json(m));
    }
    json rules = json::array();
    for (const auto& r : bundle.rules) {
        rules.push_back(rule_to_json(r));
    }
    const json doc = {{"schema_version", kBundleSchemaVersion},
                      {"clusters", std::move(clusters)},
                      {"hmms", std::move(hmms)},
                      {"rules", std::move(rules)}};
    return doc.dump(1) + "\n";
}

ModelBundle parse_model_bundle(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& err) {
        throw BundleError(fmt::format("model bundle is not valid JSON: {}", err.what()));
    }
    if (!doc.is_object() || !doc.contains("schema_version")) {
        throw BundleError("model bundle has no schema_version");
    }
    if (doc.at("schema_version") != kBundleSchemaVersion) {
        throw BundleError(fmt::format("model bundle schema_version {} is not supported (expected {})",
                                      doc.at("schema_version").dump(), kBundleSchemaVersion));
    }
    ModelBundle bundle;
    std::string where = "clusters";
    try {
        for (const auto& c : doc.at("clusters")) {
            bundle.clusters.push_back(cluster_from_json(c));
        }
        std::size_t i = 0;
        for (const auto& m : doc.at("hmms")) {
            where = fmt::format("hmms[{}]", i++);
            bundle.hmms.push_back(hmm_from_json(m));
        }
        i = 0;
        for (const auto& r : doc.at("rules")) {
            where = fmt::format("rules[{}]", i++);
            bundle.rules.push_back(rule_from_json(r));
        }
    } catch (const json::exception& err) {
        throw BundleError(fmt::format("model bundle {}: {}", where, err.what()));
    } catch (const ValidationError& err) {
        throw BundleError(fmt::format("model bundle {}: {}", where, err.what()));
    }
    return bundle;
}

void write_model_bundle(std::span<const Cluster> clusters, std::span<const ActivityHMM> hmms,
                        std::span<const PredictionRule> rules, const std::filesystem::path& path) {
    ModelBundle bundle{{clusters.begin(), clusters.end()}, {hmms.begin(), hmms.end()}, {rules.begin(), rules.end()}};
    const auto text = render_model_bundle(bundle);
    try {
        write_text_file(path, text);
    } catch (const BundleError&) {
        throw;
    } catch (const Error& err) {
        throw BundleError(err.what());
    }
}

ModelBundle read_model_bundle(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const Error& err) {
        throw BundleError(err.what());
    }
    return parse_model_bundle(text);
}

std::string render_patterns(std::span<const TemporalPattern> patterns, std::size_t minsup, std::size_t sequences) {
    json arr = json::array();
    for (const auto& p : patterns) {
        arr.push_back({{"slots", pattern_to_json(p)}, {"support", p.support}, {"well_formed", p.well_formed}});
    }
    const json doc = {{"minsup", minsup}, {"sequences", sequences}, {"patterns", std::move(arr)}};
    return doc.dump(1) + "\n";
}

std::vector<TemporalPattern> parse_patterns(std::string_view text) {
    std::vector<TemporalPattern> out;
    try {
        const json doc = json::parse(text);
        for (const auto& p : doc.at("patterns")) {
            auto pattern = pattern_from_json(p.at("slots"), p.at("support").get<std::size_t>());
            if (p.at("well_formed").get<bool>() != pattern.well_formed) {
                throw ValidationError(fmt::format("pattern {}: well_formed flag is wrong", pattern.str()));
            }
            out.push_back(std::move(pattern));
        }
    } catch (const json::exception& err) {
        throw ValidationError(fmt::format("pattern file: {}", err.what()));
    }
    return out;
}

}  // namespace actlearn
