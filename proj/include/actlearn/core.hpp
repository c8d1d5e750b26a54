#pragma once

#include <chrono>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace actlearn {

/// Absolute instant at one-second resolution (UTC, no leap seconds).
using Instant = std::chrono::sys_seconds;
using Duration = std::chrono::seconds;

// Error hierarchy. Everything thrown on bad input data derives from Error so
// callers (the CLI in particular) can tell data problems from programming
// errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed text input. line() is 1-based; 0 when not line-oriented.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& message);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A value violates a domain invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Parses `YYYY-MM-DDTHH:MM:SS`, optionally followed by a fractional part
/// (truncated) and a trailing `Z`. A space is accepted in place of `T`.
/// Throws ValidationError on anything else, including out-of-range fields.
Instant parse_instant(std::string_view text);

/// Inverse of parse_instant: `YYYY-MM-DDTHH:MM:SS`.
std::string format_instant(Instant t);

/// Seconds since midnight of the instant's calendar day.
std::int64_t seconds_of_day(Instant t);

/// An event type: the pair (service id, event type), e.g. (75, ON).
struct EventTypeKey {
    std::string service_id;
    std::string event_type;

    auto operator<=>(const EventTypeKey&) const = default;
    bool operator==(const EventTypeKey&) const = default;

    /// "service_id:event_type"
    std::string str() const;
    /// Splits at the last ':'. Throws ValidationError on empty halves.
    static EventTypeKey parse(std::string_view text);
};

/// One sensor firing.
struct Event {
    std::string service_id;
    std::string event_type;
    Instant timestamp{};
    std::string location;

    EventTypeKey key() const { return {service_id, event_type}; }
    bool operator==(const Event&) const = default;
};

/// Throws ValidationError if any string field is empty.
void validate(const Event& e);

/// Time-ordered events. Unsorted input is stably sorted by timestamp.
class EventSequence {
public:
    EventSequence() = default;
    explicit EventSequence(std::vector<Event> events);

    const std::vector<Event>& events() const noexcept { return events_; }
    std::size_t size() const noexcept { return events_.size(); }
    bool empty() const noexcept { return events_.empty(); }
    const Event& operator[](std::size_t i) const { return events_[i]; }
    auto begin() const noexcept { return events_.begin(); }
    auto end() const noexcept { return events_.end(); }

    std::vector<EventTypeKey> keys() const;

    bool operator==(const EventSequence&) const = default;

private:
    std::vector<Event> events_;
};

/// One performance of an activity.
struct ActivityOccurrence {
    std::string sid;
    std::optional<std::string> label;
    std::string location;
    Instant start{};
    Instant end{};
    EventSequence events;

    Duration duration() const { return end - start; }
    bool operator==(const ActivityOccurrence&) const = default;
};

/// Checks start <= end and that every event lies inside [start, end].
/// The error message names the sid.
void validate(const ActivityOccurrence& occurrence);

/// Throws ValidationError if two occurrences share a sid.
void validate_unique_sids(const std::vector<ActivityOccurrence>& corpus);

/// Minimum support, either an absolute sequence count or a fraction of the
/// database size (ceiling-rounded when resolved).
class MinSupport {
public:
    static MinSupport count(std::size_t n);
    static MinSupport fraction(double f);
    /// "3" -> count 3, "0.03" -> fraction, "3%" -> fraction 0.03. Values
    /// >= 1 without a percent sign must be integral and are counts.
    static MinSupport parse(std::string_view text);

    bool is_fraction() const noexcept { return is_fraction_; }
    double value() const noexcept { return value_; }
    /// Absolute count for a database of db_size sequences, at least 1.
    std::size_t resolve(std::size_t db_size) const;
    std::string str() const;

    bool operator==(const MinSupport&) const = default;

private:
    MinSupport(bool is_fraction, double value) : is_fraction_(is_fraction), value_(value) {}
    bool is_fraction_ = false;
    double value_ = 1.0;
};

struct MiningConfig {
    double rho = 0.9;
    MinSupport minsup = MinSupport::fraction(0.03);
    double min_pre = 0.5;
    double smoothing = 0.01;
    double emission_floor = 1e-3;
    Duration segment_gap{300};
};

/// Throws ValidationError naming the first out-of-range field.
void validate(const MiningConfig& config);

}  // namespace actlearn
