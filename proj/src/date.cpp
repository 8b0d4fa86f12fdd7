#include "trendlab/date.h"

#include "trendlab/error.h"

#include <charconv>
#include <cstdio>

namespace trendlab {

namespace {

bool parse_uint(std::string_view s, unsigned& out) {
    if (s.empty()) return false;
    for (char c : s) {
        if (c < '0' || c > '9') return false;
    }
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

Date::Date(int year, unsigned month, unsigned day) {
    std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                    std::chrono::day{day}};
    if (!ymd.ok()) {
        throw ParseError("invalid calendar date " + std::to_string(year) + "-" +
                         std::to_string(month) + "-" + std::to_string(day));
    }
    days_ = std::chrono::sys_days{ymd}.time_since_epoch().count();
}

Date Date::parse(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw ParseError("expected date YYYY-MM-DD, got '" + std::string(text) + "'");
    }
    unsigned y = 0, m = 0, d = 0;
    if (!parse_uint(text.substr(0, 4), y) || !parse_uint(text.substr(5, 2), m) ||
        !parse_uint(text.substr(8, 2), d)) {
        throw ParseError("expected date YYYY-MM-DD, got '" + std::string(text) + "'");
    }
    return Date(static_cast<int>(y), m, d);
}

std::string Date::to_string() const {
    std::chrono::year_month_day ymd{sys_days()};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

bool Date::is_weekend() const {
    std::chrono::weekday wd{sys_days()};
    return wd == std::chrono::Saturday || wd == std::chrono::Sunday;
}

Date Date::next_business_day() const {
    Date d = Date(sys_days() + std::chrono::days{1});
    while (d.is_weekend()) d = Date(d.sys_days() + std::chrono::days{1});
    return d;
}

}  // namespace trendlab
