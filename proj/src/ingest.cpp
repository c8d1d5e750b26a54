#include "actlearn/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include <fmt/format.h>
#include <json.hpp>

namespace actlearn {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            if (pos < text.size()) {
                lines.push_back(text.substr(pos));
            }
            break;
        }
        lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    return lines;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    for (;;) {
        const auto comma = line.find(',', pos);
        if (comma == std::string_view::npos) {
            fields.push_back(trim(line.substr(pos)));
            return fields;
        }
        fields.push_back(trim(line.substr(pos, comma - pos)));
        pos = comma + 1;
    }
}

}  // namespace

EventSequence parse_event_log(std::string_view source) {
    static constexpr std::string_view kColumns[] = {"timestamp", "sensor_id", "event_type", "location"};

    const auto lines = split_lines(source);
    std::size_t header_line = 0;
    while (header_line < lines.size() && trim(lines[header_line]).empty()) {
        ++header_line;
    }
    if (header_line == lines.size()) {
        throw ParseError(1, "missing header row");
    }
    // Tolerate a UTF-8 byte-order mark on the header.
    std::string_view header = lines[header_line];
    if (header.substr(0, 3) == "\xEF\xBB\xBF") {
        header.remove_prefix(3);
    }
    const auto names = split_fields(header);
    std::size_t index[4];
    for (std::size_t c = 0; c < 4; ++c) {
        const auto it = std::find(names.begin(), names.end(), kColumns[c]);
        if (it == names.end()) {
            throw ParseError(header_line + 1, fmt::format("missing column '{}'", kColumns[c]));
        }
        index[c] = static_cast<std::size_t>(it - names.begin());
    }

    std::vector<Event> events;
    for (std::size_t i = header_line + 1; i < lines.size(); ++i) {
        const std::size_t lineno = i + 1;
        if (trim(lines[i]).empty()) {
            continue;
        }
        const auto fields = split_fields(lines[i]);
        if (fields.size() != names.size()) {
            throw ParseError(lineno, fmt::format("expected {} fields, found {}", names.size(), fields.size()));
        }
        for (std::size_t c = 0; c < 4; ++c) {
            if (fields[index[c]].empty()) {
                throw ParseError(lineno, fmt::format("empty field '{}'", kColumns[c]));
            }
        }
        Event e;
        try {
            e.timestamp = parse_instant(fields[index[0]]);
        } catch (const ValidationError& err) {
            throw ParseError(lineno, err.what());
        }
        e.service_id = std::string(fields[index[1]]);
        e.event_type = std::string(fields[index[2]]);
        e.location = std::string(fields[index[3]]);
        events.push_back(std::move(e));
    }
    return EventSequence(std::move(events));
}

std::string render_event_log(const EventSequence& events) {
    std::string out = "timestamp,sensor_id,event_type,location\n";
    for (const auto& e : events) {
        validate(e);
        for (const std::string* f : {&e.service_id, &e.event_type, &e.location}) {
            if (f->find_first_of(",\r\n") != std::string::npos || trim(*f) != *f) {
                throw ValidationError(fmt::format("field '{}' cannot be written to CSV", *f));
            }
        }
        out += fmt::format("{},{},{},{}\n", format_instant(e.timestamp), e.service_id, e.event_type, e.location);
    }
    return out;
}

namespace {

std::string require_string(const json& obj, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) {
        throw ValidationError(fmt::format("missing or non-string field '{}'", key));
    }
    return it->get<std::string>();
}

std::optional<std::string> sid_of(const json& record) {
    const auto it = record.find("sid");
    if (it == record.end() || it->is_null()) {
        return std::nullopt;
    }
    if (it->is_string()) {
        return it->get<std::string>();
    }
    if (it->is_number_integer()) {
        return std::to_string(it->get<long long>());
    }
    throw ValidationError("field 'sid' must be a string or integer");
}

}  // namespace

std::vector<ActivityOccurrence> parse_occurrences(std::string_view source) {
    struct Pending {
        std::size_t line;
        ActivityOccurrence occurrence;
        bool has_sid;
    };
    std::vector<Pending> pending;
    std::unordered_set<std::string> explicit_sids;

    const auto lines = split_lines(source);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t lineno = i + 1;
        if (trim(lines[i]).empty()) {
            continue;
        }
        try {
            const json record = json::parse(lines[i]);
            if (!record.is_object()) {
                throw ValidationError("record is not a JSON object");
            }
            ActivityOccurrence occ;
            const auto sid = sid_of(record);
            if (sid) {
                if (!explicit_sids.insert(*sid).second) {
                    throw ValidationError(fmt::format("duplicate sid '{}'", *sid));
                }
                occ.sid = *sid;
            }
            if (const auto it = record.find("label"); it != record.end() && !it->is_null()) {
                if (!it->is_string()) {
                    throw ValidationError("field 'label' must be a string or null");
                }
                occ.label = it->get<std::string>();
            }
            occ.location = require_string(record, "location");
            occ.start = parse_instant(require_string(record, "start"));
            occ.end = parse_instant(require_string(record, "end"));
            std::vector<Event> events;
            if (const auto it = record.find("events"); it != record.end()) {
                if (!it->is_array()) {
                    throw ValidationError("field 'events' must be an array");
                }
                for (const auto& ev : *it) {
                    if (!ev.is_object()) {
                        throw ValidationError("event is not a JSON object");
                    }
                    Event e;
                    e.service_id = require_string(ev, "service_id");
                    e.event_type = require_string(ev, "event_type");
                    e.timestamp = parse_instant(require_string(ev, "t"));
                    e.location = ev.contains("location") ? require_string(ev, "location") : occ.location;
                    events.push_back(std::move(e));
                }
            }
            occ.events = EventSequence(std::move(events));
            pending.push_back({lineno, std::move(occ), sid.has_value()});
        } catch (const json::exception& err) {
            throw ParseError(lineno, err.what());
        } catch (const ValidationError& err) {
            throw ParseError(lineno, err.what());
        }
    }

    std::size_t next = 0;
    std::vector<ActivityOccurrence> out;
    out.reserve(pending.size());
    for (auto& p : pending) {
        if (!p.has_sid) {
            while (explicit_sids.count(std::to_string(next)) != 0) {
                ++next;
            }
            p.occurrence.sid = std::to_string(next++);
        }
        try {
            validate(p.occurrence);
        } catch (const ValidationError& err) {
            throw ParseError(p.line, err.what());
        }
        out.push_back(std::move(p.occurrence));
    }
    return out;
}

std::string render_occurrences(const std::vector<ActivityOccurrence>& corpus) {
    std::string out;
    for (const auto& o : corpus) {
        json events = json::array();
        for (const auto& e : o.events) {
            events.push_back({{"service_id", e.service_id},
                              {"event_type", e.event_type},
                              {"t", format_instant(e.timestamp)},
                              {"location", e.location}});
        }
        json record = {{"sid", o.sid},
                       {"label", o.label ? json(*o.label) : json(nullptr)},
                       {"location", o.location},
                       {"start", format_instant(o.start)},
                       {"end", format_instant(o.end)},
                       {"events", std::move(events)}};
        out += record.dump();
        out += '\n';
    }
    return out;
}

std::vector<EventSequence> segment(const EventSequence& stream, Duration gap) {
    if (gap.count() <= 0) {
        throw std::invalid_argument("segment gap must be positive");
    }
    std::vector<EventSequence> out;
    std::vector<Event> current;
    for (const auto& e : stream) {
        if (!current.empty() && e.timestamp - current.back().timestamp > gap) {
            out.emplace_back(std::move(current));
            current.clear();
        }
        current.push_back(e);
    }
    if (!current.empty()) {
        out.emplace_back(std::move(current));
    }
    return out;
}

std::vector<ActivityOccurrence> segments_to_occurrences(const std::vector<EventSequence>& segments) {
    std::vector<ActivityOccurrence> out;
    out.reserve(segments.size());
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const auto& seg = segments[i];
        if (seg.empty()) {
            continue;
        }
        std::map<std::string, std::size_t> votes;
        for (const auto& e : seg) {
            ++votes[e.location];
        }
        const auto best = std::max_element(votes.begin(), votes.end(), [](const auto& a, const auto& b) {
            return a.second < b.second;  // first maximum wins: smallest name
        });
        ActivityOccurrence occ;
        occ.sid = fmt::format("{:05d}", i);
        occ.location = best->first;
        occ.start = seg.events().front().timestamp;
        occ.end = seg.events().back().timestamp;
        occ.events = seg;
        out.push_back(std::move(occ));
    }
    return out;
}

std::vector<std::vector<ActivityOccurrence>> group_by_period(std::vector<ActivityOccurrence> corpus,
                                                             Duration period) {
    if (period.count() <= 0) {
        throw std::invalid_argument("period must be positive");
    }
    std::map<std::int64_t, std::vector<ActivityOccurrence>> windows;
    for (auto& o : corpus) {
        const auto t = o.start.time_since_epoch().count();
        // floor division so pre-epoch instants land in the right window
        auto w = t / period.count();
        if (t % period.count() < 0) {
            --w;
        }
        windows[w].push_back(std::move(o));
    }
    std::vector<std::vector<ActivityOccurrence>> out;
    out.reserve(windows.size());
    for (auto& [w, occs] : windows) {
        std::stable_sort(occs.begin(), occs.end(),
                         [](const auto& a, const auto& b) { return a.start < b.start; });
        out.push_back(std::move(occs));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic corpora

void validate(const SyntheticSpec& spec) {
    if (spec.activities.empty()) {
        throw ValidationError("synthetic spec needs at least one activity template");
    }
    if (spec.days < 1) {
        throw ValidationError("synthetic spec needs days >= 1");
    }
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    for (const auto& t : spec.activities) {
        const auto where = fmt::format("template '{}'", t.label);
        if (t.label.empty() || t.location.empty()) {
            throw ValidationError(where + ": empty label or location");
        }
        if (t.core.empty()) {
            throw ValidationError(where + ": empty core event list");
        }
        if (!prob(t.optional_probability) || !prob(t.swap_probability) || !prob(t.drop_probability)) {
            throw ValidationError(where + ": probability outside [0, 1]");
        }
        if (!(t.start_stddev >= 0.0) || !(t.duration_stddev >= 0.0)) {
            throw ValidationError(where + ": negative standard deviation");
        }
        if (!(t.duration_mean > 0.0)) {
            throw ValidationError(where + ": duration_mean must be positive");
        }
    }
}

namespace {

double parse_clock(const json& v) {
    if (v.is_number()) {
        return v.get<double>();
    }
    if (!v.is_string()) {
        throw ValidationError("start time must be seconds or \"HH:MM[:SS]\"");
    }
    const auto s = v.get<std::string>();
    int h = 0, m = 0, sec = 0;
    char extra = 0;
    const int n = std::sscanf(s.c_str(), "%d:%d:%d%c", &h, &m, &sec, &extra);
    if (n < 2 || n > 3 || h < 0 || h > 23 || m < 0 || m > 59 || sec < 0 || sec > 59) {
        throw ValidationError(fmt::format("invalid clock time '{}'", s));
    }
    return h * 3600.0 + m * 60.0 + sec;
}

std::vector<EventTypeKey> parse_keys(const json& obj, const char* key) {
    std::vector<EventTypeKey> out;
    if (const auto it = obj.find(key); it != obj.end()) {
        for (const auto& k : *it) {
            out.push_back(EventTypeKey::parse(k.get<std::string>()));
        }
    }
    return out;
}

// mt19937_64 is fully specified by the standard; the distributions are not,
// so uniform/normal draws are derived here to keep corpora identical across
// standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

    double normal(double mean, double stddev) {
        if (stddev == 0.0) {
            return mean;
        }
        double u1 = uniform();
        while (u1 <= 0.0) {
            u1 = uniform();
        }
        const double u2 = uniform();
        const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
        return mean + stddev * z;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace

SyntheticSpec parse_synthetic_spec(std::string_view json_text) {
    SyntheticSpec spec;
    try {
        const json doc = json::parse(json_text);
        spec.days = doc.value("days", 1);
        spec.seed = doc.value("seed", std::uint64_t{0});
        if (doc.contains("start_date")) {
            const auto t = parse_instant(doc.at("start_date").get<std::string>() + "T00:00:00");
            spec.start_date = std::chrono::floor<std::chrono::days>(t);
        }
        for (const auto& a : doc.at("activities")) {
            ActivityTemplate t;
            t.label = a.at("label").get<std::string>();
            t.location = a.at("location").get<std::string>();
            t.core = parse_keys(a, "core");
            t.optional = parse_keys(a, "optional");
            t.optional_probability = a.value("optional_probability", 0.5);
            t.swap_probability = a.value("swap_probability", 0.0);
            t.drop_probability = a.value("drop_probability", 0.0);
            t.start_mean = parse_clock(a.at("start_mean"));
            t.start_stddev = a.value("start_stddev", 0.0);
            t.duration_mean = a.at("duration_mean").get<double>();
            t.duration_stddev = a.value("duration_stddev", 0.0);
            spec.activities.push_back(std::move(t));
        }
    } catch (const json::exception& err) {
        throw ValidationError(fmt::format("synthetic spec: {}", err.what()));
    }
    validate(spec);
    return spec;
}

std::string render_synthetic_spec(const SyntheticSpec& spec) {
    auto keys = [](const std::vector<EventTypeKey>& ks) {
        json arr = json::array();
        for (const auto& k : ks) {
            arr.push_back(k.str());
        }
        return arr;
    };
    json acts = json::array();
    for (const auto& t : spec.activities) {
        acts.push_back({{"label", t.label},
                        {"location", t.location},
                        {"core", keys(t.core)},
                        {"optional", keys(t.optional)},
                        {"optional_probability", t.optional_probability},
                        {"swap_probability", t.swap_probability},
                        {"drop_probability", t.drop_probability},
                        {"start_mean", t.start_mean},
                        {"start_stddev", t.start_stddev},
                        {"duration_mean", t.duration_mean},
                        {"duration_stddev", t.duration_stddev}});
    }
    const json doc = {{"days", spec.days},
                      {"seed", spec.seed},
                      {"start_date", format_instant(Instant{spec.start_date}).substr(0, 10)},
                      {"activities", std::move(acts)}};
    return doc.dump(2) + "\n";
}

SyntheticSpec with_noise(SyntheticSpec spec, double drop_probability, double swap_probability) {
    for (auto& t : spec.activities) {
        t.drop_probability = drop_probability;
        t.swap_probability = swap_probability;
    }
    validate(spec);
    return spec;
}

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
    validate(spec);
    Rng rng(spec.seed);
    constexpr std::int64_t kDay = 86400;

    struct Drawn {
        ActivityOccurrence occurrence;
        std::size_t template_index;
    };
    std::vector<Drawn> drawn;
    drawn.reserve(static_cast<std::size_t>(spec.days) * spec.activities.size());

    for (int day = 0; day < spec.days; ++day) {
        const Instant midnight{spec.start_date + std::chrono::days{day}};
        for (std::size_t ti = 0; ti < spec.activities.size(); ++ti) {
            const auto& t = spec.activities[ti];
            const auto start_offset = std::clamp<std::int64_t>(
                std::llround(rng.normal(t.start_mean, t.start_stddev)), 0, kDay - 1);
            std::int64_t duration = 0;
            for (int attempt = 0; attempt < 1000 && duration < 1; ++attempt) {
                duration = std::llround(rng.normal(t.duration_mean, t.duration_stddev));
            }
            duration = std::max<std::int64_t>(duration, 1);

            std::vector<EventTypeKey> keys;
            for (const auto& k : t.core) {
                if (!rng.bernoulli(t.drop_probability)) {
                    keys.push_back(k);
                }
            }
            if (keys.empty()) {
                keys.push_back(t.core.front());
            }
            for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
                if (rng.bernoulli(t.swap_probability)) {
                    std::swap(keys[i], keys[i + 1]);
                }
            }
            for (const auto& k : t.optional) {
                if (rng.bernoulli(t.optional_probability)) {
                    const auto pos = rng.index(keys.size() + 1);
                    keys.insert(keys.begin() + static_cast<std::ptrdiff_t>(pos), k);
                }
            }

            ActivityOccurrence occ;
            occ.label = t.label;
            occ.location = t.location;
            occ.start = midnight + Duration{start_offset};
            occ.end = occ.start + Duration{duration};
            std::vector<Event> events;
            const auto n = static_cast<std::int64_t>(keys.size());
            for (std::int64_t k = 0; k < n; ++k) {
                const auto offset = (k + 1) * duration / (n + 1);
                events.push_back({keys[static_cast<std::size_t>(k)].service_id,
                                  keys[static_cast<std::size_t>(k)].event_type, occ.start + Duration{offset},
                                  t.location});
            }
            occ.events = EventSequence(std::move(events));
            drawn.push_back({std::move(occ), ti});
        }
    }

    std::stable_sort(drawn.begin(), drawn.end(), [](const Drawn& a, const Drawn& b) {
        if (a.occurrence.start != b.occurrence.start) {
            return a.occurrence.start < b.occurrence.start;
        }
        return a.template_index < b.template_index;
    });

    SyntheticCorpus corpus;
    std::vector<Event> all;
    for (std::size_t i = 0; i < drawn.size(); ++i) {
        auto& occ = drawn[i].occurrence;
        occ.sid = fmt::format("{:05d}", i);
        all.insert(all.end(), occ.events.begin(), occ.events.end());
        corpus.occurrences.push_back(std::move(occ));
    }
    corpus.stream = EventSequence(std::move(all));
    return corpus;
}

}  // namespace actlearn
