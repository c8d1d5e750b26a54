#include "actlearn/tpminer.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>

#include <fmt/format.h>

#include "actlearn/ingest.hpp"

namespace actlearn {

std::string EndpointSymbol::str() const { return label + (is_start() ? "+" : "-"); }

EndpointSymbol EndpointSymbol::parse(std::string_view text) {
    static constexpr std::string_view kUnicodeMinus = "−";
    EndpointSymbol s;
    if (text.size() >= kUnicodeMinus.size() && text.substr(text.size() - kUnicodeMinus.size()) == kUnicodeMinus) {
        s.label = std::string(text.substr(0, text.size() - kUnicodeMinus.size()));
        s.polarity = Polarity::kEnd;
    } else if (!text.empty() && (text.back() == '+' || text.back() == '-')) {
        s.label = std::string(text.substr(0, text.size() - 1));
        s.polarity = text.back() == '+' ? Polarity::kStart : Polarity::kEnd;
    } else {
        throw ValidationError(fmt::format("invalid endpoint symbol '{}'", text));
    }
    if (s.label.empty()) {
        throw ValidationError(fmt::format("endpoint symbol '{}' has an empty label", text));
    }
    return s;
}

// ---------------------------------------------------------------------------
// Endpoint representation

EndpointSequence to_endpoint_sequence(std::vector<LabeledInterval> intervals, std::string sid) {
    for (const auto& iv : intervals) {
        if (iv.label.empty()) {
            throw ValidationError(fmt::format("sequence '{}': interval with empty label", sid));
        }
        if (iv.start >= iv.end) {
            throw ValidationError(fmt::format("sequence '{}': interval '{}' has start {} >= end {}", sid, iv.label,
                                              format_instant(iv.start), format_instant(iv.end)));
        }
    }
    std::sort(intervals.begin(), intervals.end());

    std::map<Instant, SymbolSet> by_time;
    for (std::size_t i = 0; i < intervals.size();) {
        LabeledInterval merged = intervals[i];
        std::size_t j = i + 1;
        while (j < intervals.size() && intervals[j].label == merged.label && intervals[j].start < merged.end) {
            merged.end = std::max(merged.end, intervals[j].end);
            ++j;
        }
        by_time[merged.start].push_back({merged.label, Polarity::kStart});
        by_time[merged.end].push_back({merged.label, Polarity::kEnd});
        i = j;
    }

    EndpointSequence seq;
    seq.sid = std::move(sid);
    for (auto& [time, symbols] : by_time) {
        std::sort(symbols.begin(), symbols.end());
        symbols.erase(std::unique(symbols.begin(), symbols.end()), symbols.end());
        seq.slots.push_back({time, std::move(symbols)});
    }
    return seq;
}

std::vector<LabeledInterval> intervals_of(const EndpointSequence& seq) {
    std::map<std::string, std::pair<std::vector<Instant>, std::vector<Instant>>> bounds;
    for (const auto& slot : seq.slots) {
        for (const auto& s : slot.symbols) {
            auto& [starts, ends] = bounds[s.label];
            (s.is_start() ? starts : ends).push_back(slot.time);
        }
    }
    std::vector<LabeledInterval> out;
    for (const auto& [label, se] : bounds) {
        const auto& [starts, ends] = se;
        if (starts.size() != ends.size()) {
            throw ValidationError(fmt::format("sequence '{}': unbalanced endpoints for '{}'", seq.sid, label));
        }
        for (std::size_t k = 0; k < starts.size(); ++k) {
            out.push_back({label, starts[k], ends[k]});
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<EndpointSequence> build_interval_database(std::span<const ActivityOccurrence> corpus, Duration period) {
    std::vector<ActivityOccurrence> copy(corpus.begin(), corpus.end());
    std::vector<EndpointSequence> db;
    for (auto& window : group_by_period(std::move(copy), period)) {
        std::vector<LabeledInterval> intervals;
        for (const auto& o : window) {
            if (!o.label) {
                throw ValidationError(fmt::format("occurrence '{}' has no label", o.sid));
            }
            if (o.start >= o.end) {
                throw ValidationError(fmt::format("occurrence '{}' has zero duration", o.sid));
            }
            intervals.push_back({*o.label, o.start, o.end});
        }
        const auto t = window.front().start.time_since_epoch().count();
        auto w = t / period.count();
        if (t % period.count() < 0) {
            --w;
        }
        db.push_back(to_endpoint_sequence(std::move(intervals), format_instant(Instant{Duration{w * period.count()}})));
    }
    return db;
}

// ---------------------------------------------------------------------------
// Patterns

bool is_well_formed(std::span<const SymbolSet> slots) {
    std::map<std::string_view, long> open;
    for (const auto& slot : slots) {
        for (const auto& s : slot) {
            open[s.label] += s.is_start() ? 1 : -1;
        }
        for (const auto& s : slot) {
            if (open[s.label] < 0) {
                return false;
            }
        }
    }
    return std::all_of(open.begin(), open.end(), [](const auto& kv) { return kv.second == 0; });
}

TemporalPattern TemporalPattern::from_slots(std::vector<SymbolSet> slots, std::size_t support) {
    TemporalPattern p;
    for (auto& slot : slots) {
        std::sort(slot.begin(), slot.end());
        slot.erase(std::unique(slot.begin(), slot.end()), slot.end());
        if (!slot.empty()) {
            p.slots.push_back(std::move(slot));
        }
    }
    p.support = support;
    p.well_formed = is_well_formed(p.slots);
    return p;
}

std::size_t TemporalPattern::length() const {
    std::size_t n = 0;
    for (const auto& s : slots) {
        n += s.size();
    }
    return n;
}

const EndpointSymbol& TemporalPattern::final_symbol() const {
    if (slots.empty()) {
        throw std::logic_error("final_symbol of an empty pattern");
    }
    return slots.back().back();
}

std::string TemporalPattern::str() const {
    std::string out = "<";
    for (std::size_t i = 0; i < slots.size(); ++i) {
        out += i == 0 ? "{" : ",{";
        for (std::size_t k = 0; k < slots[i].size(); ++k) {
            if (k > 0) {
                out += ',';
            }
            out += slots[i][k].str();
        }
        out += '}';
    }
    out += '>';
    return out;
}

TemporalPattern prefix_of(const TemporalPattern& pattern) {
    if (pattern.empty()) {
        throw std::invalid_argument("prefix_of an empty pattern");
    }
    auto slots = pattern.slots;
    slots.back().pop_back();
    if (slots.back().empty()) {
        slots.pop_back();
    }
    return TemporalPattern::from_slots(std::move(slots));
}

bool contains(const EndpointSequence& seq, std::span<const SymbolSet> pattern_slots) {
    std::size_t j = 0;
    for (const auto& ps : pattern_slots) {
        while (j < seq.slots.size() &&
               !std::includes(seq.slots[j].symbols.begin(), seq.slots[j].symbols.end(), ps.begin(), ps.end())) {
            ++j;
        }
        if (j == seq.slots.size()) {
            return false;
        }
        ++j;
    }
    return true;
}

bool contains(const EndpointSequence& seq, const TemporalPattern& pattern) { return contains(seq, pattern.slots); }

std::size_t support(const TemporalPattern& pattern, std::span<const EndpointSequence> db) {
    return static_cast<std::size_t>(
        std::count_if(db.begin(), db.end(), [&](const EndpointSequence& s) { return contains(s, pattern); }));
}

// ---------------------------------------------------------------------------
// Projection

namespace detail {

// Symbols are interned as 2 * label_index + (end ? 1 : 0) with labels sorted,
// so code order equals canonical symbol order.
using Code = std::uint32_t;

struct EncodedDatabase {
    std::vector<std::string> labels;
    std::vector<std::string> sids;
    std::vector<std::vector<std::vector<Code>>> sequences;

    std::size_t alphabet() const { return labels.size() * 2; }

    std::optional<Code> encode(const EndpointSymbol& s) const {
        const auto it = std::lower_bound(labels.begin(), labels.end(), s.label);
        if (it == labels.end() || *it != s.label) {
            return std::nullopt;
        }
        return static_cast<Code>(2 * (it - labels.begin()) + (s.is_start() ? 0 : 1));
    }

    EndpointSymbol decode(Code c) const {
        return {labels[c / 2], (c % 2 == 0) ? Polarity::kStart : Polarity::kEnd};
    }

    SymbolSet decode(const std::vector<Code>& slot) const {
        SymbolSet out;
        out.reserve(slot.size());
        for (auto c : slot) {
            out.push_back(decode(c));
        }
        return out;
    }
};

std::shared_ptr<const EncodedDatabase> encode(std::span<const EndpointSequence> db) {
    auto enc = std::make_shared<EncodedDatabase>();
    for (const auto& seq : db) {
        for (const auto& slot : seq.slots) {
            for (const auto& s : slot.symbols) {
                enc->labels.push_back(s.label);
            }
        }
    }
    std::sort(enc->labels.begin(), enc->labels.end());
    enc->labels.erase(std::unique(enc->labels.begin(), enc->labels.end()), enc->labels.end());
    for (const auto& seq : db) {
        enc->sids.push_back(seq.sid);
        std::vector<std::vector<Code>> slots;
        for (const auto& slot : seq.slots) {
            std::vector<Code> codes;
            for (const auto& s : slot.symbols) {
                codes.push_back(*enc->encode(s));
            }
            std::sort(codes.begin(), codes.end());
            codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
            slots.push_back(std::move(codes));
        }
        enc->sequences.push_back(std::move(slots));
    }
    return enc;
}

}  // namespace detail

namespace {

using detail::Code;
using Entry = std::pair<std::uint32_t, std::uint32_t>;  // (sequence, slot of last prefix match)
constexpr std::uint32_t kRoot = 0xffffffffu;

bool slot_has(const std::vector<Code>& slot, Code c) { return std::binary_search(slot.begin(), slot.end(), c); }

bool slot_includes(const std::vector<Code>& slot, const std::vector<Code>& subset) {
    return std::includes(slot.begin(), slot.end(), subset.begin(), subset.end());
}

// Leftmost match of the prefix extended by `code`, for every entry that has one.
std::vector<Entry> extend_entries(const detail::EncodedDatabase& db, std::span<const Entry> entries,
                                  const std::vector<Code>& last_slot, Code code, bool same_slot) {
    std::vector<Entry> out;
    for (const auto& [seq, pos] : entries) {
        const auto& slots = db.sequences[seq];
        if (!same_slot) {
            const std::uint32_t first = pos == kRoot ? 0 : pos + 1;
            for (std::uint32_t j = first; j < slots.size(); ++j) {
                if (slot_has(slots[j], code)) {
                    out.emplace_back(seq, j);
                    break;
                }
            }
            continue;
        }
        if (slot_has(slots[pos], code)) {
            out.emplace_back(seq, pos);
            continue;
        }
        for (std::uint32_t j = pos + 1; j < slots.size(); ++j) {
            if (slot_has(slots[j], code) && slot_includes(slots[j], last_slot)) {
                out.emplace_back(seq, j);
                break;
            }
        }
    }
    return out;
}

}  // namespace

ProjectedDatabase::ProjectedDatabase(std::span<const EndpointSequence> db) : db_(detail::encode(db)) {
    entries_.reserve(db.size());
    for (std::uint32_t i = 0; i < db.size(); ++i) {
        entries_.push_back({i, kRoot});
    }
}

TemporalPattern ProjectedDatabase::prefix() const {
    return TemporalPattern::from_slots(prefix_, entries_.size());
}

std::vector<ProjectedDatabase::Suffix> ProjectedDatabase::suffixes() const {
    std::vector<Suffix> out;
    for (const auto& e : entries_) {
        Suffix s;
        s.sid = db_->sids[e.sequence];
        const auto& slots = db_->sequences[e.sequence];
        std::uint32_t next = 0;
        if (e.slot != kRoot) {
            // Non-empty projection: every prefix label occurs in the database.
            const Code last = *db_->encode(prefix_.back().back());
            std::vector<Code> rest;
            for (auto c : slots[e.slot]) {
                if (c > last) {
                    rest.push_back(c);
                }
            }
            if (!rest.empty()) {
                s.slots.push_back(db_->decode(rest));
                s.first_slot_partial = true;
            }
            next = e.slot + 1;
        }
        for (auto j = next; j < slots.size(); ++j) {
            s.slots.push_back(db_->decode(slots[j]));
        }
        out.push_back(std::move(s));
    }
    return out;
}

ProjectedDatabase project(const ProjectedDatabase& from, const EndpointSymbol& extension, bool same_slot) {
    const auto prefix = from.prefix();
    if (same_slot) {
        if (prefix.empty()) {
            throw std::invalid_argument("same-slot extension of the empty prefix");
        }
        if (!(prefix.slots.back().back() < extension)) {
            throw std::invalid_argument(fmt::format("same-slot extension {} does not follow {} canonically",
                                                    extension.str(), prefix.slots.back().back().str()));
        }
    }
    if (!extension.is_start()) {
        long open = 0;
        for (const auto& slot : prefix.slots) {
            for (const auto& s : slot) {
                if (s.label == extension.label) {
                    open += s.is_start() ? 1 : -1;
                }
            }
        }
        if (open <= 0) {
            throw std::invalid_argument(
                fmt::format("{} has no unmatched start in prefix {}", extension.str(), prefix.str()));
        }
    }

    ProjectedDatabase out;
    out.db_ = from.db_;
    out.prefix_ = prefix.slots;
    if (same_slot) {
        out.prefix_.back().push_back(extension);
    } else {
        out.prefix_.push_back({extension});
    }
    const auto code = from.db_->encode(extension);
    if (!code || from.entries_.empty()) {
        return out;
    }
    std::vector<Code> last_slot;
    if (!prefix.empty()) {
        for (const auto& s : prefix.slots.back()) {
            last_slot.push_back(*from.db_->encode(s));
        }
    }
    std::vector<Entry> entries;
    entries.reserve(from.entries_.size());
    for (const auto& e : from.entries_) {
        entries.emplace_back(e.sequence, e.slot);
    }
    for (const auto& [seq, slot] : extend_entries(*from.db_, entries, last_slot, *code, same_slot)) {
        out.entries_.push_back({seq, slot});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Mining

namespace {

class PatternGrowthSearch {
public:
    PatternGrowthSearch(const detail::EncodedDatabase& db, std::size_t minsup, const MineOptions& options)
        : db_(db), minsup_(minsup), options_(options), open_(db.labels.size(), 0) {}

    struct Found {
        std::vector<std::vector<Code>> slots;
        std::size_t support;
        bool well_formed;
    };

    std::vector<Found> run() {
        std::vector<Entry> root;
        for (std::uint32_t i = 0; i < db_.sequences.size(); ++i) {
            root.emplace_back(i, kRoot);
        }
        grow(root, 0);
        std::sort(found_.begin(), found_.end(), [](const Found& a, const Found& b) { return a.slots < b.slots; });
        return std::move(found_);
    }

private:
    void grow(const std::vector<Entry>& entries, std::size_t length) {
        if (options_.max_length != 0 && length >= options_.max_length) {
            return;
        }
        const std::size_t alphabet = db_.alphabet();
        std::vector<std::size_t> seq_count(alphabet, 0), slot_count(alphabet, 0);
        std::vector<std::size_t> seq_stamp(alphabet, 0), slot_stamp(alphabet, 0);

        const bool root = prefix_.empty();
        const Code last = root ? 0 : prefix_.back().back();
        for (std::size_t idx = 0; idx < entries.size(); ++idx) {
            const std::size_t stamp = idx + 1;
            const auto& [seq, pos] = entries[idx];
            const auto& slots = db_.sequences[seq];
            const std::uint32_t first = root ? 0 : pos + 1;
            for (std::uint32_t j = first; j < slots.size(); ++j) {
                for (auto c : slots[j]) {
                    if (seq_stamp[c] != stamp) {
                        seq_stamp[c] = stamp;
                        ++seq_count[c];
                    }
                }
            }
            if (root) {
                continue;
            }
            auto mark_after_last = [&](const std::vector<Code>& slot) {
                for (auto it = std::upper_bound(slot.begin(), slot.end(), last); it != slot.end(); ++it) {
                    if (slot_stamp[*it] != stamp) {
                        slot_stamp[*it] = stamp;
                        ++slot_count[*it];
                    }
                }
            };
            mark_after_last(slots[pos]);
            for (std::uint32_t j = pos + 1; j < slots.size(); ++j) {
                if (slot_includes(slots[j], prefix_.back())) {
                    mark_after_last(slots[j]);
                }
            }
        }

        for (int kind = 0; kind < 2; ++kind) {
            const bool same_slot = kind == 0;
            if (same_slot && root) {
                continue;
            }
            const auto& counts = same_slot ? slot_count : seq_count;
            for (Code c = 0; c < alphabet; ++c) {
                if (counts[c] < minsup_ || !admissible(c)) {
                    continue;
                }
                const std::vector<Code> last_slot = root ? std::vector<Code>{} : prefix_.back();
                const auto child = extend_entries(db_, entries, last_slot, c, same_slot);
                push(c, same_slot);
                if (unbalanced_ == 0 || options_.include_partial) {
                    found_.push_back({prefix_, child.size(), unbalanced_ == 0});
                }
                grow(child, length + 1);
                pop(c, same_slot);
            }
        }
    }

    bool admissible(Code c) const { return c % 2 == 0 || open_[c / 2] > 0; }

    void push(Code c, bool same_slot) {
        if (same_slot) {
            prefix_.back().push_back(c);
        } else {
            prefix_.push_back({c});
        }
        adjust(c / 2, c % 2 == 0 ? 1 : -1);
    }

    void pop(Code c, bool same_slot) {
        if (same_slot) {
            prefix_.back().pop_back();
        } else {
            prefix_.pop_back();
        }
        adjust(c / 2, c % 2 == 0 ? -1 : 1);
    }

    void adjust(std::size_t label, long delta) {
        const bool was = open_[label] != 0;
        open_[label] += delta;
        const bool now = open_[label] != 0;
        if (was && !now) {
            --unbalanced_;
        } else if (!was && now) {
            ++unbalanced_;
        }
    }

    const detail::EncodedDatabase& db_;
    std::size_t minsup_;
    MineOptions options_;
    std::vector<std::vector<Code>> prefix_;
    std::vector<long> open_;
    std::size_t unbalanced_ = 0;
    std::vector<Found> found_;
};

}  // namespace

std::vector<TemporalPattern> mine(std::span<const EndpointSequence> db, std::size_t minsup,
                                  const MineOptions& options) {
    if (minsup < 1) {
        throw std::invalid_argument("minsup must be >= 1");
    }
    const auto encoded = detail::encode(db);
    PatternGrowthSearch search(*encoded, minsup, options);
    std::vector<TemporalPattern> out;
    for (auto& f : search.run()) {
        TemporalPattern p;
        for (const auto& slot : f.slots) {
            p.slots.push_back(encoded->decode(slot));
        }
        p.support = f.support;
        p.well_formed = f.well_formed;
        out.push_back(std::move(p));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Rules

double predictability(const TemporalPattern& full, std::span<const EndpointSequence> db) {
    const auto prefix = prefix_of(full);
    const auto prefix_support = support(prefix, db);
    if (prefix_support == 0) {
        throw ValidationError(fmt::format("prefix {} has zero support", prefix.str()));
    }
    return static_cast<double>(support(full, db)) / static_cast<double>(prefix_support);
}

namespace {

std::vector<PredictionRule> make_rules(std::span<const TemporalPattern> patterns, double min_pre,
                                       const std::function<std::size_t(const TemporalPattern&)>& prefix_support) {
    std::vector<PredictionRule> rules;
    for (const auto& p : patterns) {
        if (p.length() < 2) {
            continue;
        }
        PredictionRule r;
        r.prefix = prefix_of(p);
        r.prefix.support = prefix_support(r.prefix);
        if (r.prefix.support == 0) {
            throw ValidationError(fmt::format("prefix {} has zero support", r.prefix.str()));
        }
        if (p.support > r.prefix.support) {
            throw ValidationError(fmt::format("pattern {} has support {} above its prefix's {}", p.str(), p.support,
                                              r.prefix.support));
        }
        r.full = p;
        r.predicted_symbol = p.final_symbol();
        r.support = p.support;
        r.predictability = static_cast<double>(p.support) / static_cast<double>(r.prefix.support);
        if (r.predictability >= min_pre) {
            rules.push_back(std::move(r));
        }
    }
    std::stable_sort(rules.begin(), rules.end(), [](const PredictionRule& a, const PredictionRule& b) {
        if (a.predictability != b.predictability) {
            return a.predictability > b.predictability;
        }
        if (a.support != b.support) {
            return a.support > b.support;
        }
        return a.full.str() < b.full.str();
    });
    return rules;
}

}  // namespace

std::vector<PredictionRule> generate_rules(std::span<const TemporalPattern> patterns,
                                           std::span<const EndpointSequence> db, double min_pre) {
    std::map<std::vector<SymbolSet>, std::size_t> known;
    for (const auto& p : patterns) {
        known.emplace(p.slots, p.support);
    }
    return make_rules(patterns, min_pre, [&](const TemporalPattern& prefix) {
        const auto it = known.find(prefix.slots);
        return it != known.end() ? it->second : support(prefix, db);
    });
}

std::vector<PredictionRule> generate_rules(std::span<const TemporalPattern> patterns, double min_pre) {
    std::map<std::vector<SymbolSet>, std::size_t> known;
    for (const auto& p : patterns) {
        known.emplace(p.slots, p.support);
    }
    return make_rules(patterns, min_pre, [&](const TemporalPattern& prefix) {
        const auto it = known.find(prefix.slots);
        if (it == known.end()) {
            throw ValidationError(fmt::format("prefix {} is missing from the pattern set", prefix.str()));
        }
        return it->second;
    });
}

}  // namespace actlearn
