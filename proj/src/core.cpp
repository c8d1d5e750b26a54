#include "actlearn/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <unordered_set>

#include <fmt/format.h>

namespace actlearn {

ParseError::ParseError(std::size_t line, const std::string& message)
    : Error(line > 0 ? fmt::format("line {}: {}", line, message) : message), line_(line) {}

namespace {

bool read_fixed(std::string_view text, std::size_t pos, std::size_t width, int& out) {
    if (pos + width > text.size()) {
        return false;
    }
    const char* first = text.data() + pos;
    const char* last = first + width;
    if (!std::all_of(first, last, [](char c) { return c >= '0' && c <= '9'; })) {
        return false;
    }
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

}  // namespace

Instant parse_instant(std::string_view text) {
    using namespace std::chrono;
    auto fail = [&]() -> ValidationError {
        return ValidationError(fmt::format("invalid timestamp '{}'", text));
    };
    // YYYY-MM-DDTHH:MM:SS
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    if (text.size() < 19 || !read_fixed(text, 0, 4, y) || text[4] != '-' ||
        !read_fixed(text, 5, 2, mo) || text[7] != '-' || !read_fixed(text, 8, 2, d) ||
        (text[10] != 'T' && text[10] != ' ') || !read_fixed(text, 11, 2, h) || text[13] != ':' ||
        !read_fixed(text, 14, 2, mi) || text[16] != ':' || !read_fixed(text, 17, 2, s)) {
        throw fail();
    }
    std::string_view rest = text.substr(19);
    if (!rest.empty() && rest.front() == '.') {
        std::size_t digits = 1;
        while (digits < rest.size() && rest[digits] >= '0' && rest[digits] <= '9') {
            ++digits;
        }
        if (digits == 1) {
            throw fail();
        }
        rest.remove_prefix(digits);
    }
    if (rest == "Z") {
        rest.remove_prefix(1);
    }
    if (!rest.empty()) {
        throw fail();
    }
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || s > 59) {
        throw fail();
    }
    return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

std::string format_instant(Instant t) {
    using namespace std::chrono;
    const sys_days day_part = floor<days>(t);
    const year_month_day ymd{day_part};
    const hh_mm_ss<seconds> hms{t - day_part};
    return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}", static_cast<int>(ymd.year()),
                       static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                       hms.hours().count(), hms.minutes().count(), hms.seconds().count());
}

std::int64_t seconds_of_day(Instant t) {
    using namespace std::chrono;
    return (t - floor<days>(t)).count();
}

std::string EventTypeKey::str() const { return service_id + ":" + event_type; }

EventTypeKey EventTypeKey::parse(std::string_view text) {
    const auto colon = text.rfind(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 == text.size()) {
        throw ValidationError(fmt::format("invalid event type '{}', expected service_id:event_type", text));
    }
    return {std::string(text.substr(0, colon)), std::string(text.substr(colon + 1))};
}

void validate(const Event& e) {
    if (e.service_id.empty()) {
        throw ValidationError("event has empty service_id");
    }
    if (e.event_type.empty()) {
        throw ValidationError("event has empty event_type");
    }
    if (e.location.empty()) {
        throw ValidationError("event has empty location");
    }
}

EventSequence::EventSequence(std::vector<Event> events) : events_(std::move(events)) {
    std::stable_sort(events_.begin(), events_.end(),
                     [](const Event& a, const Event& b) { return a.timestamp < b.timestamp; });
}

std::vector<EventTypeKey> EventSequence::keys() const {
    std::vector<EventTypeKey> out;
    out.reserve(events_.size());
    for (const auto& e : events_) {
        out.push_back(e.key());
    }
    return out;
}

void validate(const ActivityOccurrence& occurrence) {
    if (occurrence.location.empty()) {
        throw ValidationError(fmt::format("occurrence '{}': empty location", occurrence.sid));
    }
    if (occurrence.start > occurrence.end) {
        throw ValidationError(fmt::format("occurrence '{}': start {} is after end {}", occurrence.sid,
                                          format_instant(occurrence.start), format_instant(occurrence.end)));
    }
    for (const auto& e : occurrence.events) {
        validate(e);
        if (e.timestamp < occurrence.start || e.timestamp > occurrence.end) {
            throw ValidationError(fmt::format("occurrence '{}': event {} at {} lies outside [{}, {}]",
                                              occurrence.sid, e.key().str(), format_instant(e.timestamp),
                                              format_instant(occurrence.start), format_instant(occurrence.end)));
        }
    }
}

void validate_unique_sids(const std::vector<ActivityOccurrence>& corpus) {
    std::unordered_set<std::string> seen;
    for (const auto& o : corpus) {
        if (!seen.insert(o.sid).second) {
            throw ValidationError(fmt::format("duplicate sid '{}'", o.sid));
        }
    }
}

MinSupport MinSupport::count(std::size_t n) {
    if (n < 1) {
        throw ValidationError("minsup count must be >= 1");
    }
    return MinSupport(false, static_cast<double>(n));
}

MinSupport MinSupport::fraction(double f) {
    if (!(f > 0.0 && f <= 1.0)) {
        throw ValidationError(fmt::format("minsup fraction {} outside (0, 1]", f));
    }
    return MinSupport(true, f);
}

MinSupport MinSupport::parse(std::string_view text) {
    bool percent = false;
    if (!text.empty() && text.back() == '%') {
        percent = true;
        text.remove_suffix(1);
    }
    double v = 0.0;
    const std::string buf(text);
    std::size_t used = 0;
    try {
        v = std::stod(buf, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (buf.empty() || used != buf.size() || !std::isfinite(v)) {
        throw ValidationError(fmt::format("invalid minsup '{}'", text));
    }
    if (percent) {
        return fraction(v / 100.0);
    }
    if (v < 1.0) {
        return fraction(v);
    }
    if (v != std::floor(v)) {
        throw ValidationError(fmt::format("minsup count '{}' is not an integer", text));
    }
    return count(static_cast<std::size_t>(v));
}

std::size_t MinSupport::resolve(std::size_t db_size) const {
    if (!is_fraction_) {
        return static_cast<std::size_t>(value_);
    }
    // 0.03 * 100 is 3.0000000000000004 in binary; absorb that before ceil.
    const double raw = value_ * static_cast<double>(db_size);
    const auto n = static_cast<std::size_t>(std::ceil(raw - 1e-9));
    return std::max<std::size_t>(n, 1);
}

std::string MinSupport::str() const {
    return is_fraction_ ? fmt::format("{}", value_) : fmt::format("{}", static_cast<std::size_t>(value_));
}

void validate(const MiningConfig& c) {
    if (!(c.rho >= 0.0 && c.rho <= 1.0)) {
        throw ValidationError(fmt::format("rho {} outside [0, 1]", c.rho));
    }
    if (!(c.min_pre >= 0.0 && c.min_pre <= 1.0)) {
        throw ValidationError(fmt::format("min_pre {} outside [0, 1]", c.min_pre));
    }
    if (!(c.smoothing >= 0.0) || !std::isfinite(c.smoothing)) {
        throw ValidationError(fmt::format("smoothing {} must be >= 0", c.smoothing));
    }
    if (!(c.emission_floor > 0.0 && c.emission_floor < 1.0)) {
        throw ValidationError(fmt::format("emission_floor {} outside (0, 1)", c.emission_floor));
    }
    if (c.segment_gap.count() <= 0) {
        throw ValidationError("segment_gap must be positive");
    }
}

}  // namespace actlearn
