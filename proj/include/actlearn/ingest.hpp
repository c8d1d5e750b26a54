#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "actlearn/core.hpp"

namespace actlearn {

/// Parses a CSV event log with header `timestamp,sensor_id,event_type,location`
/// (columns may appear in any order). Blank lines are skipped. Errors carry
/// the 1-based line number.
EventSequence parse_event_log(std::string_view source);

/// Renders events in the layout parse_event_log reads. Throws ValidationError
/// on fields containing a comma or line break.
std::string render_event_log(const EventSequence& events);

/// Parses JSON-lines occurrence records:
///   {"sid", "label" (nullable), "location", "start", "end",
///    "events": [{"service_id", "event_type", "t", "location"}]}
/// `sid` may be a string or integer, or absent; missing sids are numbered
/// sequentially, skipping explicit ones. An event without `location`
/// inherits the occurrence location.
std::vector<ActivityOccurrence> parse_occurrences(std::string_view source);

/// One JSON object per line, keys sorted.
std::string render_occurrences(const std::vector<ActivityOccurrence>& corpus);

/// Splits `stream` wherever two adjacent events are more than `gap` apart.
/// The result is a partition of the input: lossless, order-preserving, and
/// with no empty part. Throws std::invalid_argument if gap <= 0.
std::vector<EventSequence> segment(const EventSequence& stream, Duration gap);

/// Wraps segments as unlabeled occurrences spanning first..last event. The
/// location is the most frequent event location (ties: smallest string).
std::vector<ActivityOccurrence> segments_to_occurrences(const std::vector<EventSequence>& segments);

/// Occurrences grouped into consecutive windows of `period` aligned to the
/// epoch; only non-empty windows are returned, in time order. An occurrence
/// belongs to the window containing its start.
std::vector<std::vector<ActivityOccurrence>> group_by_period(std::vector<ActivityOccurrence> corpus,
                                                             Duration period);

// ---------------------------------------------------------------------------
// Synthetic corpora

struct ActivityTemplate {
    std::string label;
    std::string location;
    std::vector<EventTypeKey> core;      // performed in this order unless swapped
    std::vector<EventTypeKey> optional;  // each inserted with optional_probability
    double optional_probability = 0.5;
    double swap_probability = 0.0;  // per adjacent pair, one left-to-right pass
    double drop_probability = 0.0;  // per core event
    double start_mean = 0.0;        // seconds after midnight
    double start_stddev = 0.0;
    double duration_mean = 600.0;  // seconds
    double duration_stddev = 0.0;
};

struct SyntheticSpec {
    std::vector<ActivityTemplate> activities;
    int days = 1;
    std::uint64_t seed = 0;
    std::chrono::sys_days start_date = std::chrono::sys_days{std::chrono::year{2003} / 5 / 3};
};

void validate(const SyntheticSpec& spec);

/// Reads the JSON form of a SyntheticSpec. Start times accept "HH:MM[:SS]"
/// or seconds; all other durations are seconds.
SyntheticSpec parse_synthetic_spec(std::string_view json_text);
std::string render_synthetic_spec(const SyntheticSpec& spec);

/// Same spec with every template's drop and swap probabilities replaced.
SyntheticSpec with_noise(SyntheticSpec spec, double drop_probability, double swap_probability);

struct SyntheticCorpus {
    std::vector<ActivityOccurrence> occurrences;  // sorted by start, sids "00000", "00001", ...
    EventSequence stream;                         // all inner events, merged
};

/// Pure function of the spec (seed included): days x templates occurrences,
/// each labeled with its template label.
SyntheticCorpus generate_synthetic(const SyntheticSpec& spec);

}  // namespace actlearn
