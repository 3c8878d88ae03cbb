#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace glens {

// Day-granularity calendar date.
using Date = std::chrono::sys_days;

// Parses "YYYY-MM-DD"; returns nullopt on malformed or impossible dates.
std::optional<Date> parse_date(std::string_view text);

// Throws glens::Error("ParseError") on failure.
Date date_from_string(std::string_view text);

std::string to_string(Date d);

Date make_date(int year, unsigned month, unsigned day);

// Calendar month arithmetic; the day is clamped to the end of the target month.
Date add_months(Date d, int months);

inline Date add_days(Date d, int days) { return d + std::chrono::days{days}; }

// Half-open [begin, end).
struct DateRange {
    Date begin;
    Date end;

    bool contains(Date d) const { return begin <= d && d < end; }
    bool operator==(const DateRange&) const = default;
};

}  // namespace glens
