#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>

namespace topictrace {

// Calendar date at day resolution. Every timestamp in the pipeline is a day;
// the analyses are all daily.
struct Date {
    int year = 1970;
    int month = 1; // 1..12
    int day = 1;   // 1..31

    auto operator<=>(const Date&) const = default;
};

bool is_valid_date(const Date& d);

// Days since 1970-01-01, negative before.
std::int64_t to_day_number(const Date& d);
Date from_day_number(std::int64_t n);

Date add_days(const Date& d, std::int64_t n);
std::int64_t days_between(const Date& from, const Date& to); // to - from

int iso_weekday(const Date& d); // 0 = Monday .. 6 = Sunday

// Strict ISO-8601 "YYYY-MM-DD"; nullopt on anything else.
std::optional<Date> parse_date(const std::string& iso);
std::string format_date(const Date& d);

} // namespace topictrace
