#include "topictrace/date.hpp"

#include <cctype>
#include <chrono>
#include <cstdio>

namespace topictrace {

namespace {

using days = std::chrono::days;
using sys_days = std::chrono::sys_days;

std::chrono::year_month_day to_ymd(const Date& d) {
    return std::chrono::year{d.year} / d.month / d.day;
}

} // namespace

bool is_valid_date(const Date& d) {
    return to_ymd(d).ok();
}

std::int64_t to_day_number(const Date& d) {
    return sys_days{to_ymd(d)}.time_since_epoch().count();
}

Date from_day_number(std::int64_t n) {
    std::chrono::year_month_day ymd{sys_days{days{n}}};
    return Date{int(ymd.year()), int(unsigned(ymd.month())), int(unsigned(ymd.day()))};
}

Date add_days(const Date& d, std::int64_t n) {
    return from_day_number(to_day_number(d) + n);
}

std::int64_t days_between(const Date& from, const Date& to) {
    return to_day_number(to) - to_day_number(from);
}

int iso_weekday(const Date& d) {
    std::chrono::weekday wd{sys_days{to_ymd(d)}};
    return int(wd.iso_encoding()) - 1;
}

std::optional<Date> parse_date(const std::string& iso) {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
    for (int i : {0, 1, 2, 3, 5, 6, 8, 9}) {
        if (!std::isdigit(static_cast<unsigned char>(iso[i]))) return std::nullopt;
    }
    Date d;
    d.year = std::stoi(iso.substr(0, 4));
    d.month = std::stoi(iso.substr(5, 2));
    d.day = std::stoi(iso.substr(8, 2));
    if (!is_valid_date(d)) return std::nullopt;
    return d;
}

std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

} // namespace topictrace
