#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "actlearn/core.hpp"

namespace actlearn {

enum class Polarity : std::uint8_t { kStart, kEnd };

/// Start (`label+`) or end (`label-`) of an activity interval. Ordered by
/// label, then start before end; this is the canonical in-slot order.
struct EndpointSymbol {
    std::string label;
    Polarity polarity = Polarity::kStart;

    auto operator<=>(const EndpointSymbol&) const = default;
    bool operator==(const EndpointSymbol&) const = default;

    bool is_start() const noexcept { return polarity == Polarity::kStart; }
    /// "label+" or "label-".
    std::string str() const;
    /// Accepts "label+", "label-" and "label−" (Unicode minus).
    static EndpointSymbol parse(std::string_view text);
};

/// Symbols sharing one instant, sorted canonically, no duplicates.
using SymbolSet = std::vector<EndpointSymbol>;

struct EndpointSlot {
    Instant time{};
    SymbolSet symbols;

    bool operator==(const EndpointSlot&) const = default;
};

/// Interval data flattened to time-ordered slots of endpoint symbols.
struct EndpointSequence {
    std::string sid;
    std::vector<EndpointSlot> slots;

    bool operator==(const EndpointSequence&) const = default;
};

struct LabeledInterval {
    std::string label;
    Instant start{};
    Instant end{};

    auto operator<=>(const LabeledInterval&) const = default;
    bool operator==(const LabeledInterval&) const = default;
};

/// Emits `label+` at each start and `label-` at each end, grouping symbols
/// with equal timestamps into one slot. Overlapping intervals with the same
/// label are first merged into their union (touching ones stay separate).
/// Throws ValidationError if an interval has start >= end or an empty label.
EndpointSequence to_endpoint_sequence(std::vector<LabeledInterval> intervals, std::string sid);

/// Pairs the k-th start of each label with its k-th end.
std::vector<LabeledInterval> intervals_of(const EndpointSequence& seq);

/// One endpoint sequence per window of `period` (see group_by_period), named
/// by the window's start instant. Every occurrence needs a label and a
/// positive duration; otherwise ValidationError naming the sid.
std::vector<EndpointSequence> build_interval_database(std::span<const ActivityOccurrence> corpus,
                                                      Duration period = Duration{86400});

/// True when, per label, ends never outnumber starts up to and including
/// any slot, and the totals match.
bool is_well_formed(std::span<const SymbolSet> slots);

struct TemporalPattern {
    std::vector<SymbolSet> slots;
    std::size_t support = 0;
    bool well_formed = false;

    /// Canonicalizes each slot, drops empty ones, sets well_formed.
    static TemporalPattern from_slots(std::vector<SymbolSet> slots, std::size_t support = 0);

    /// Total number of symbols.
    std::size_t length() const;
    bool empty() const noexcept { return slots.empty(); }
    /// Last symbol of the last slot in canonical order.
    const EndpointSymbol& final_symbol() const;
    /// e.g. "<{a+},{a-,b+}>"
    std::string str() const;

    bool operator==(const TemporalPattern&) const = default;
};

/// Pattern minus its final symbol (and its slot, if that empties it).
TemporalPattern prefix_of(const TemporalPattern& pattern);

/// Subsequence test: some strictly increasing map from pattern slots to
/// sequence slots with every pattern slot a subset of its image.
bool contains(const EndpointSequence& seq, std::span<const SymbolSet> pattern_slots);
bool contains(const EndpointSequence& seq, const TemporalPattern& pattern);

/// Number of sequences in db containing the pattern.
std::size_t support(const TemporalPattern& pattern, std::span<const EndpointSequence> db);

namespace detail {
struct EncodedDatabase;
}

/// Suffixes of the database sequences after the leftmost match of a prefix.
class ProjectedDatabase {
public:
    /// The empty-prefix projection of db (every sequence, whole).
    explicit ProjectedDatabase(std::span<const EndpointSequence> db);

    /// Prefix with support set to the number of containing sequences.
    TemporalPattern prefix() const;
    /// Number of sequences containing the prefix.
    std::size_t size() const noexcept { return entries_.size(); }

    struct Suffix {
        std::string sid;
        /// When the prefix is non-empty, slots.front() is the remainder of
        /// the slot that matched the prefix's last slot (symbols after the
        /// prefix's final symbol), omitted if that remainder is empty.
        std::vector<SymbolSet> slots;
        bool first_slot_partial = false;
    };
    std::vector<Suffix> suffixes() const;

private:
    friend ProjectedDatabase project(const ProjectedDatabase&, const EndpointSymbol&, bool);

    struct Entry {
        std::uint32_t sequence;
        std::uint32_t slot;  // slot that matched the prefix's last slot; kRoot for the empty prefix
    };
    static constexpr std::uint32_t kRoot = 0xffffffffu;

    ProjectedDatabase() = default;

    std::shared_ptr<const detail::EncodedDatabase> db_;
    std::vector<SymbolSet> prefix_;
    std::vector<Entry> entries_;
};

/// Extends the projection's prefix by one symbol, either in a new slot
/// (same_slot = false) or inside the prefix's last slot. Throws
/// std::invalid_argument when the extension is not admissible: an end
/// symbol without an unmatched start in the prefix, a same-slot extension
/// of the empty prefix, or a same-slot symbol not after the slot's last
/// symbol in canonical order.
ProjectedDatabase project(const ProjectedDatabase& from, const EndpointSymbol& extension, bool same_slot);

struct MineOptions {
    /// Keep frequent prefixes that are not well-formed (dangling starts).
    /// The result is then closed under prefix_of, which rule generation
    /// without a database relies on.
    bool include_partial = false;
    /// Upper bound on pattern length in symbols; 0 means none.
    std::size_t max_length = 0;
};

/// Depth-first pattern growth over projected databases. Returns every
/// pattern with support >= minsup (well-formed ones only unless
/// include_partial), with exact supports, sorted by canonical slot order.
std::vector<TemporalPattern> mine(std::span<const EndpointSequence> db, std::size_t minsup,
                                  const MineOptions& options = {});

/// Rule "prefix_of(full) is followed by the predicted symbol", with its confidence.
struct PredictionRule {
    TemporalPattern prefix;
    TemporalPattern full;
    EndpointSymbol predicted_symbol;
    double predictability = 0.0;
    std::size_t support = 0;

    bool operator==(const PredictionRule&) const = default;
};

/// sup(full) / sup(prefix_of(full)) over db. Throws ValidationError when the
/// prefix has zero support.
double predictability(const TemporalPattern& full, std::span<const EndpointSequence> db);

/// One rule per pattern of length >= 2 whose predictability reaches
/// min_pre, sorted by predictability desc, support desc, then str() asc.
/// Prefix supports come from `patterns` when present there, otherwise from
/// a scan of db.
std::vector<PredictionRule> generate_rules(std::span<const TemporalPattern> patterns,
                                           std::span<const EndpointSequence> db, double min_pre);

/// As above, with every prefix support looked up in `patterns`; throws
/// ValidationError if the set is not prefix-closed.
std::vector<PredictionRule> generate_rules(std::span<const TemporalPattern> patterns, double min_pre);

}  // namespace actlearn
